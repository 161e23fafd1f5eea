#pragma once

// Independent loop for the base-station cycle schedule: when each received
// measurement becomes part of the published estimate.

#include "procnet/model.hpp"

#include <vector>

namespace procnet::testing {

/// `receptions` must be sorted. Entries never fused before the horizon get `horizon`.
inline std::vector<Step> fusion_schedule(const std::vector<Step>& receptions, const FusionModel& fusion, Step horizon) {
  std::vector<Step> available(receptions.size(), horizon);
  std::vector<std::size_t> batch;
  std::size_t next = 0;
  bool busy = false;
  Step done = 0;
  for (Step t = 0; t < horizon; ++t) {
    if (busy && done == t) {
      for (auto i : batch) available[i] = t;
      busy = false;
    }
    if (!busy) {
      batch.clear();
      while (next < receptions.size() && receptions[next] <= t) batch.push_back(next++);
      if (!batch.empty()) {
        busy = true;
        done = t + fusion.delay(batch.size());
        if (done == t) {
          for (auto i : batch) available[i] = t;
          busy = false;
        }
      }
    }
  }
  return available;
}

}  // namespace procnet::testing
