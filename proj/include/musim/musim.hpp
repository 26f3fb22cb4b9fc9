// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "musim/boots.hpp"
#include "musim/errors.hpp"
#include "musim/forward_sim.hpp"
#include "musim/io.hpp"
#include "musim/kinematics.hpp"
#include "musim/muscle_model.hpp"
#include "musim/recruitment.hpp"
