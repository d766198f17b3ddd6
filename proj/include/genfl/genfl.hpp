#pragma once

#include "genfl/cli.hpp"
#include "genfl/config_io.hpp"
#include "genfl/costmodel.hpp"
#include "genfl/dataset.hpp"
#include "genfl/experiment_config.hpp"
#include "genfl/generator.hpp"
#include "genfl/log.hpp"
#include "genfl/metrics_io.hpp"
#include "genfl/model.hpp"
#include "genfl/protocol.hpp"
#include "genfl/rng.hpp"
#include "genfl/svg_plot.hpp"
