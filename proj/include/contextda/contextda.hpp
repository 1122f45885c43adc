#pragma once

// Umbrella header.

#include "contextda/baselines.hpp"
#include "contextda/cli.hpp"
#include "contextda/config.hpp"
#include "contextda/csv.hpp"
#include "contextda/detector.hpp"
#include "contextda/dqn.hpp"
#include "contextda/env.hpp"
#include "contextda/inference.hpp"
#include "contextda/matrix.hpp"
#include "contextda/metrics.hpp"
#include "contextda/nn.hpp"
#include "contextda/rng.hpp"
#include "contextda/synthetic.hpp"
#include "contextda/timeseries.hpp"
#include "contextda/trainer.hpp"
