#pragma once

// Umbrella header for the riskpipe tabular risk-analytics toolkit.

#include "riskpipe/cluster.hpp"
#include "riskpipe/dataset.hpp"
#include "riskpipe/errors.hpp"
#include "riskpipe/matrix.hpp"
#include "riskpipe/metrics.hpp"
#include "riskpipe/model_io.hpp"
#include "riskpipe/models.hpp"
#include "riskpipe/pca.hpp"
#include "riskpipe/pipeline.hpp"
#include "riskpipe/report.hpp"
#include "riskpipe/select.hpp"
#include "riskpipe/svg.hpp"
#include "riskpipe/tsne.hpp"
