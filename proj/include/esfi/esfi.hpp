#pragma once

#include "esfi/calibration.hpp"
#include "esfi/config.hpp"
#include "esfi/dataset.hpp"
#include "esfi/integrator.hpp"
#include "esfi/model.hpp"
#include "esfi/report.hpp"
#include "esfi/scenario.hpp"
#include "esfi/sensitivity.hpp"
#include "esfi/svg.hpp"
