#pragma once

#include "aggsplit/common.hpp"

namespace aggsplit {

/// Uplink: the only agent-originated data the coordinator ever sees.
/// Exactly n + m reals: the population averages of x_i and y_i.
struct AggregateMessage {
  Vector xhat;  ///< n
  Vector yhat;  ///< m

  Eigen::Index payload_size() const { return xhat.size() + yhat.size(); }
};

/// Downlink broadcast to every agent.
struct BroadcastMessage {
  Vector lambda;  ///< m, nonnegative
  Vector mu;      ///< n
  Vector sigma;   ///< n
};

}  // namespace aggsplit
