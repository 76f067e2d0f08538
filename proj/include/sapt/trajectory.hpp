#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace sapt {

/// Time-indexed rollout record. States and actions are stored row-major in
/// flat buffers; a complete trajectory has one more state than actions.
struct Trajectory {
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    std::vector<double> states;
    std::vector<double> actions;
    double dt = 0.0;
    bool truncated = false;  // episode ended early (ground contact, divergence)
    bool diverged = false;   // a non-finite state was produced

    Trajectory() = default;
    Trajectory(std::size_t sdim, std::size_t adim, double step)
        : state_dim(sdim), action_dim(adim), dt(step) {}

    std::size_t num_states() const { return state_dim == 0 ? 0 : states.size() / state_dim; }
    std::size_t num_actions() const { return action_dim == 0 ? 0 : actions.size() / action_dim; }
    bool empty() const { return states.empty(); }

    std::span<const double> state(std::size_t t) const {
        assert(t < num_states());
        return {states.data() + t * state_dim, state_dim};
    }
    std::span<const double> action(std::size_t t) const {
        assert(t < num_actions());
        return {actions.data() + t * action_dim, action_dim};
    }
    std::span<const double> final_state() const { return state(num_states() - 1); }

    void push_state(std::span<const double> s) { states.insert(states.end(), s.begin(), s.end()); }
    void push_action(std::span<const double> a) { actions.insert(actions.end(), a.begin(), a.end()); }

    bool operator==(const Trajectory&) const = default;
};

}  // namespace sapt
