#pragma once

#include "carleman/errors.hpp"
#include "carleman/basis.hpp"
#include "carleman/linalg.hpp"
#include "carleman/operator.hpp"
#include "carleman/assembly.hpp"
#include "carleman/integrate.hpp"
#include "carleman/metrics.hpp"
#include "carleman/io.hpp"
#include "carleman/bench.hpp"
#include "carleman/report.hpp"
