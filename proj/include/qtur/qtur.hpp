// Copyright 2026 The qtur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qtur/error.hpp"
#include "qtur/experiments.hpp"
#include "qtur/fisher.hpp"
#include "qtur/master_equation.hpp"
#include "qtur/model_io.hpp"
#include "qtur/operator_algebra.hpp"
#include "qtur/parallel.hpp"
#include "qtur/random.hpp"
#include "qtur/trajectories.hpp"
