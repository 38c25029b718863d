#pragma once

#include "homsim/estimation.hpp"
#include "homsim/information.hpp"
#include "homsim/montecarlo.hpp"
#include "homsim/physics.hpp"
#include "homsim/sensor.hpp"
