#pragma once

#include "cppo/adam.hpp"
#include "cppo/agent.hpp"
#include "cppo/checkpoint.hpp"
#include "cppo/config.hpp"
#include "cppo/distributions.hpp"
#include "cppo/envs.hpp"
#include "cppo/evaluate.hpp"
#include "cppo/experience_queue.hpp"
#include "cppo/grad_check.hpp"
#include "cppo/losses.hpp"
#include "cppo/matrix.hpp"
#include "cppo/metrics.hpp"
#include "cppo/mlp.hpp"
#include "cppo/param_store.hpp"
#include "cppo/params.hpp"
#include "cppo/rng.hpp"
#include "cppo/rollout.hpp"
#include "cppo/running_norm.hpp"
#include "cppo/train_async.hpp"
#include "cppo/training.hpp"
