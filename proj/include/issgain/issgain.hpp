#pragma once

#include "issgain/backstepping.hpp"
#include "issgain/coefficient.hpp"
#include "issgain/disturbance.hpp"
#include "issgain/error.hpp"
#include "issgain/gains.hpp"
#include "issgain/grid.hpp"
#include "issgain/io.hpp"
#include "issgain/pde_sim.hpp"
#include "issgain/sturm_liouville.hpp"
#include "issgain/tridiagonal.hpp"
