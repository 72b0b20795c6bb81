#include "cfpp/env.hpp"

#include <algorithm>

#include "cfpp/errors.hpp"

namespace cfpp {

Episode make_episode(const CFSegment& segment, double dt) {
  if (segment.length() < 2) throw DomainError("make_episode: segment too short");
  Episode e;
  e.lv_speed_trace = segment.lv_speed;
  e.true_ego_speed = segment.ego_speed;
  e.lv_length = segment.lv_length;
  e.dt = dt;
  e.initial.dy_le = segment.spacing.front();
  e.initial.v_e = segment.ego_speed.front();
  e.initial.v_l = segment.lv_speed.front();
  e.initial.dv_le = e.initial.v_l - e.initial.v_e;
  return e;
}

Transition step(const CFState& s, double a, double dt, double v_l_next, double lv_length) {
  if (dt <= 0.0) throw DomainError("step: dt must be positive");
  Transition t;
  t.s = s;
  t.a = a;
  const double v_e_next = std::max(0.0, s.v_e + a * dt);
  const double ego_disp = 0.5 * (s.v_e + v_e_next) * dt;
  const double lv_disp = 0.5 * (s.v_l + v_l_next) * dt;
  t.s_next.dy_le = s.dy_le + lv_disp - ego_disp;
  t.s_next.v_e = v_e_next;
  t.s_next.v_l = v_l_next;
  t.s_next.dv_le = v_l_next - v_e_next;
  t.collided = t.s_next.dy_le - lv_length <= 0.0;
  return t;
}

std::vector<Transition> rollout(const PolicyFn& policy, const Episode& episode,
                                std::uint64_t seed) {
  if (episode.lv_speed_trace.size() < 2) throw DomainError("rollout: LV trace too short");
  Rng rng(seed);
  std::vector<Transition> out;
  out.reserve(episode.lv_speed_trace.size() - 1);
  CFState s = episode.initial;
  for (size_t k = 0; k + 1 < episode.lv_speed_trace.size(); ++k) {
    const double a = policy(s, rng);
    Transition t = step(s, a, episode.dt, episode.lv_speed_trace[k + 1], episode.lv_length);
    out.push_back(t);
    if (t.collided) break;
    s = t.s_next;
  }
  return out;
}

}  // namespace cfpp
