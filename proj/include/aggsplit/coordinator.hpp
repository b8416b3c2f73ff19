#pragma once

// The coordinator side of the semi-decentralized iteration. Nothing in this
// header can name an agent, a GameSpec or a stacked strategy vector: the
// update consumes its own state, the aggregate uplink and three scalars.

#include "aggsplit/messages.hpp"

#include <utility>

namespace aggsplit {

struct CentralSteps {
  double alpha = 1.0;
  double delta_c = 0.5;
  double beta_c = 0.5;
};

struct CoordinatorState {
  Vector sigma;
  Vector mu;
  Vector lambda;
  Vector prev_xhat;  ///< xhat^k, lagged for the 2 xhat^{k+1} - xhat^k terms
  Vector prev_yhat;  ///< yhat^k
};

/// sigma^0 = xhat^0, mu^0 = 0, lambda^0 given (must be >= 0), lagged
/// aggregates seeded from iteration 0.
CoordinatorState coordinator_init(const AggregateMessage& initial, const Vector& lambda0);

/// lambda+ = max(0, lambda + delta_c (2 yhat+ - yhat))
/// mu+     = mu - beta_c (2 xhat+ - xhat - sigma + alpha mu)
/// sigma+  = sigma - alpha mu+
std::pair<CoordinatorState, BroadcastMessage> coordinator_update(const CoordinatorState& coord,
                                                                 const AggregateMessage& agg,
                                                                 const CentralSteps& steps);

inline BroadcastMessage broadcast_of(const CoordinatorState& c) {
  return {c.lambda, c.mu, c.sigma};
}

}  // namespace aggsplit
