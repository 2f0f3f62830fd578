#pragma once

#include "nmfcast/datakit/baseline.hpp"
#include "nmfcast/datakit/dataset.hpp"
#include "nmfcast/datakit/synthetic.hpp"
#include "nmfcast/errors.hpp"
#include "nmfcast/lcf/dendrogram.hpp"
#include "nmfcast/lcf/lcf.hpp"
#include "nmfcast/lcf/regressor.hpp"
#include "nmfcast/masking.hpp"
#include "nmfcast/matrix_core.hpp"
#include "nmfcast/metrics.hpp"
#include "nmfcast/report.hpp"
#include "nmfcast/smm.hpp"
#include "nmfcast/solvers/solvers.hpp"
