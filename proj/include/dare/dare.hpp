/*
 * Copyright 2026 The dare-forest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DARE_DARE_HPP_
#define DARE_DARE_HPP_

#include "dare/bench.hpp"
#include "dare/common.hpp"
#include "dare/dataset.hpp"
#include "dare/metrics.hpp"
#include "dare/rng.hpp"
#include "dare/serialize.hpp"
#include "dare/splitcrit.hpp"
#include "dare/tree.hpp"
#include "dare/unlearn.hpp"

#endif  // DARE_DARE_HPP_
