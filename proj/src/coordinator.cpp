#include "aggsplit/coordinator.hpp"

namespace aggsplit {

CoordinatorState coordinator_init(const AggregateMessage& initial, const Vector& lambda0) {
  require_size(lambda0, initial.yhat.size(), "coordinator_init lambda0");
  if (lambda0.size() > 0 && lambda0.minCoeff() < 0.0)
    fail(ErrorCode::InvalidArgument, "lambda0 must be nonnegative");
  CoordinatorState c;
  c.sigma = initial.xhat;
  c.mu = Vector::Zero(initial.xhat.size());
  c.lambda = lambda0;
  c.prev_xhat = initial.xhat;
  c.prev_yhat = initial.yhat;
  return c;
}

std::pair<CoordinatorState, BroadcastMessage> coordinator_update(const CoordinatorState& coord,
                                                                 const AggregateMessage& agg,
                                                                 const CentralSteps& steps) {
  require_size(agg.xhat, coord.sigma.size(), "aggregate xhat");
  require_size(agg.yhat, coord.lambda.size(), "aggregate yhat");
  CoordinatorState next;
  next.lambda = (coord.lambda + steps.delta_c * (2.0 * agg.yhat - coord.prev_yhat)).cwiseMax(0.0);
  next.mu = coord.mu - steps.beta_c * (2.0 * agg.xhat - coord.prev_xhat - coord.sigma +
                                       steps.alpha * coord.mu);
  next.sigma = coord.sigma - steps.alpha * next.mu;
  next.prev_xhat = agg.xhat;
  next.prev_yhat = agg.yhat;
  BroadcastMessage b = broadcast_of(next);
  return {std::move(next), std::move(b)};
}

}  // namespace aggsplit
