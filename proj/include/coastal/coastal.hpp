#pragma once

#include "coastal/assessment.hpp"
#include "coastal/change.hpp"
#include "coastal/classification.hpp"
#include "coastal/external.hpp"
#include "coastal/io.hpp"
#include "coastal/labels.hpp"
#include "coastal/preprocess.hpp"
#include "coastal/raster.hpp"
#include "coastal/report.hpp"
#include "coastal/scheme.hpp"
#include "coastal/tileset.hpp"
#include "coastal/tiling.hpp"
