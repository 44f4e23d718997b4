/* Copyright 2026 The RatingRL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ratingrl/kernels/reduce.hpp"

#include <omp.h>

namespace ratingrl::kernels {

int max_threads() noexcept { return omp_get_max_threads(); }

void set_threads(int n) noexcept { omp_set_num_threads(n > 0 ? n : 1); }

}  // namespace ratingrl::kernels
