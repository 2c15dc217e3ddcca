// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.
#pragma once

#include "sleepose/augmentation.hpp"
#include "sleepose/bvh.hpp"
#include "sleepose/dataset.hpp"
#include "sleepose/ecoc.hpp"
#include "sleepose/fusion.hpp"
#include "sleepose/kinematics.hpp"
#include "sleepose/madgwick.hpp"
#include "sleepose/metrics.hpp"
#include "sleepose/parallel.hpp"
#include "sleepose/pipeline.hpp"
#include "sleepose/pose.hpp"
#include "sleepose/random.hpp"
#include "sleepose/rotations.hpp"
#include "sleepose/svm.hpp"
#include "sleepose/synth.hpp"
#include "sleepose/tuning.hpp"
