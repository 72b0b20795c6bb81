#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cfpp/extraction.hpp"
#include "cfpp/random.hpp"

namespace cfpp {

// MDP state for the car-following task: head-to-head spacing to the LV, ego
// speed, LV speed, and their difference (kept consistent by construction).
struct CFState {
  double dy_le = 0.0;  // m
  double v_e = 0.0;    // m/s
  double v_l = 0.0;    // m/s
  double dv_le = 0.0;  // m/s, v_l - v_e
};

struct Episode {
  std::vector<double> lv_speed_trace;  // m/s, one sample per frame
  std::vector<double> true_ego_speed;  // m/s, recorded ego speeds (may be empty)
  double lv_length = 0.0;              // m
  double dt = 0.04;                    // s
  CFState initial;
};

struct Transition {
  CFState s;
  double a = 0.0;  // m/s^2
  CFState s_next;
  bool collided = false;
};

Episode make_episode(const CFSegment& segment, double dt);

// One kinematic step: trapezoidal displacement for both vehicles, ego speed
// floored at zero, collision when the bumper gap closes.
Transition step(const CFState& s, double a, double dt, double v_l_next, double lv_length);

// Action chosen from the current state; rng carries any policy stochasticity.
using PolicyFn = std::function<double(const CFState&, Rng&)>;

// Iterate step over the LV trace; stops early on collision.
std::vector<Transition> rollout(const PolicyFn& policy, const Episode& episode,
                                std::uint64_t seed);

}  // namespace cfpp
