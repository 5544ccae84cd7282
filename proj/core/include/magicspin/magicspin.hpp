#pragma once

#include "magicspin/analysis.hpp"
#include "magicspin/config.hpp"
#include "magicspin/dynamics.hpp"
#include "magicspin/network.hpp"
#include "magicspin/optimize.hpp"
#include "magicspin/rotation.hpp"
#include "magicspin/spin_algebra.hpp"
#include "magicspin/table.hpp"
