#pragma once

#include "binaries.hpp"
#include "bond.hpp"
#include "errors.hpp"
#include "mvn.hpp"
#include "one_factor.hpp"
#include "term_structure.hpp"
#include "two_factor.hpp"
#include "mc_oracle.hpp"
