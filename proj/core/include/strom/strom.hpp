#pragma once

#include "strom/basis.hpp"
#include "strom/bounds.hpp"
#include "strom/error.hpp"
#include "strom/linalg.hpp"
#include "strom/persist.hpp"
#include "strom/problems.hpp"
#include "strom/spacetime.hpp"
#include "strom/srom.hpp"
#include "strom/system.hpp"
