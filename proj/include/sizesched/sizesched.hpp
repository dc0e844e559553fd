#pragma once

#include "sizesched/core.hpp"
#include "sizesched/engine.hpp"
#include "sizesched/experiment.hpp"
#include "sizesched/metrics.hpp"
#include "sizesched/policies.hpp"
#include "sizesched/report.hpp"
#include "sizesched/workload.hpp"
