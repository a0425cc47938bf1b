#pragma once

// Umbrella include for the whole library.

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/eval/harness.hpp"
#include "pidtc/eval/homography.hpp"
#include "pidtc/eval/metrics.hpp"
#include "pidtc/eval/rnn.hpp"
#include "pidtc/geometry.hpp"
#include "pidtc/manifest.hpp"
#include "pidtc/model/config.hpp"
#include "pidtc/model/network.hpp"
#include "pidtc/model/train.hpp"
#include "pidtc/model/weights.hpp"
#include "pidtc/num/adam.hpp"
#include "pidtc/num/checkpoint.hpp"
#include "pidtc/num/ops.hpp"
#include "pidtc/num/tensor.hpp"
#include "pidtc/rng.hpp"
#include "pidtc/synth/court.hpp"
#include "pidtc/synth/dataset.hpp"
#include "pidtc/synth/generate.hpp"
#include "pidtc/synth/render.hpp"
#include "pidtc/synth/trajectory.hpp"
#include "pidtc/textio.hpp"
#include "pidtc/version.hpp"
#include "pidtc/vision/canny.hpp"
#include "pidtc/vision/corners.hpp"
#include "pidtc/vision/filter.hpp"
#include "pidtc/vision/hough.hpp"
#include "pidtc/vision/image.hpp"
#include "pidtc/vision/pgm.hpp"
