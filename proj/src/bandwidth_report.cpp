/* Copyright 2026 The kernelfuse Authors. All Rights Reserved.

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

#include <nlohmann/json.hpp>

#include "kernelfuse/bandwidth.hpp"

namespace kernelfuse {

void to_json(nlohmann::json& j, const BandwidthReport<double>& r) {
  nlohmann::json visited = nlohmann::json::array();
  for (const auto& step : r.visited) visited.push_back({{"k", step.k}, {"c", step.c}, {"delta", step.delta}});
  j = {{"maxmin", r.maxmin},
       {"c_single", r.c_single},
       {"epsilon_single", r.epsilon_single},
       {"delta_hat", r.delta_hat},
       {"target", r.target},
       {"grid_size", r.grid_size},
       {"k_ad", r.k_ad},
       {"c_ad", r.c_ad},
       {"epsilon_ad", r.epsilon_ad},
       {"delta_ad", r.delta_ad},
       {"sparse_warning", r.sparse_warning},
       {"visited", visited}};
}

}  // namespace kernelfuse
