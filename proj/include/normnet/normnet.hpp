#pragma once

#include "activations.hpp"
#include "algebra.hpp"
#include "complexity.hpp"
#include "constructors/approximator.hpp"
#include "constructors/lipr.hpp"
#include "constructors/lipr_io.hpp"
#include "constructors/product.hpp"
#include "constructors/random.hpp"
#include "constructors/square.hpp"
#include "constructors/targets.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "serialize.hpp"
