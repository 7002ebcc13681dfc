#pragma once

#include "mmpen/mm_engine.hpp"

namespace mmpen {

/// Huber for regression, logistic for classification.
LossSpec convex_pilot_loss(Task task);

}  // namespace mmpen
