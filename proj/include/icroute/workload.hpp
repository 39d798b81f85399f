#pragma once

#include <cstdint>
#include <vector>

#include "icroute/core.hpp"

namespace icroute {

struct WorkloadItem {
  MessageId msg_id = 0;
  NodeId node = 0;
  std::uint32_t round = 0;
  Slot created_at = 0;
};

/// One message per node per cycle for `rounds` cycles starting at the cycle
/// boundary `start`, stamped at the node's working slot. `bases[i]` is the
/// base offset of node i; index 0 (the sink) and nodes listed in `skip` create
/// nothing. Ids run in (round, node) order.
inline std::vector<WorkloadItem> message_workload(Slot start, std::uint32_t rounds, const std::vector<WorkOffset>& bases,
                                                  const ChargingSpec& spec, const std::vector<bool>& skip = {}) {
  std::vector<WorkloadItem> out;
  for (std::uint32_t k = 0; k < rounds; ++k) {
    for (NodeId i = 1; i < bases.size(); ++i) {
      if (i < skip.size() && skip[i]) {
        continue;
      }
      out.push_back(WorkloadItem{out.size(), i, k, start + static_cast<Slot>(k) * spec.cycle_len() + bases[i].value});
    }
  }
  return out;
}

}  // namespace icroute
