#pragma once

#include "groupshift/bigint.hpp"
#include "groupshift/chart.hpp"
#include "groupshift/cli.hpp"
#include "groupshift/engine.hpp"
#include "groupshift/entropy.hpp"
#include "groupshift/errors.hpp"
#include "groupshift/group.hpp"
#include "groupshift/json_io.hpp"
#include "groupshift/pattern.hpp"
#include "groupshift/reduction.hpp"
#include "groupshift/sft.hpp"
