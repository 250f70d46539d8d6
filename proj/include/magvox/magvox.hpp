#pragma once

#include "magvox/vec3.hpp"
#include "magvox/error.hpp"
#include "magvox/ingest.hpp"
#include "magvox/machine_config.hpp"
#include "magvox/voxel_model.hpp"
#include "magvox/kinematics.hpp"
#include "magvox/path_planner.hpp"
#include "magvox/gcode.hpp"
#include "magvox/virtual_printer.hpp"
#include "magvox/magnetostatics.hpp"
#include "magvox/actuation_preview.hpp"
#include "magvox/reports.hpp"
