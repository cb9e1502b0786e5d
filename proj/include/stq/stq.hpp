#pragma once

#include "stq/error.hpp"
#include "stq/experiment.hpp"
#include "stq/flow.hpp"
#include "stq/frame.hpp"
#include "stq/image_io.hpp"
#include "stq/joint_loss.hpp"
#include "stq/masks.hpp"
#include "stq/metrics.hpp"
#include "stq/parallel.hpp"
