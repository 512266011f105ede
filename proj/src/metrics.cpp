#include "rescue/engine.hpp"
#include "rescue/errors.hpp"

namespace rescue {

MetricsRecord compute_metrics(const EpisodeLog& log) {
  MetricsRecord m;
  double reach_time_sum = 0.0;
  for (const auto& r : log.records) {
    switch (r.event) {
      case EventType::tick: ++m.ticks; break;
      case EventType::reach:
        ++m.groups_reached;
        m.survivors_reached += r.survivors;
        reach_time_sum += r.time_min;
        break;
      case EventType::deliver: m.supplies_delivered += r.supplies; break;
      case EventType::lost: ++m.groups_lost; break;
      default: break;
    }
  }
  if (m.ticks == 0) throw ContractError("compute_metrics: episode log has no ticks");

  m.coverage_pct = log.total_survivors > 0 ? 100.0 * m.survivors_reached / log.total_survivors : 0.0;
  m.response_time_min = m.groups_reached > 0 ? reach_time_sum / m.groups_reached
                                             : log.horizon_ticks * log.tick_seconds / 60.0;
  double latency = 0.0;
  for (double s : log.latency_s) latency += s;
  m.decision_latency_s = log.latency_s.empty() ? 0.0 : latency / static_cast<double>(log.latency_s.size());
  return m;
}

}  // namespace rescue
