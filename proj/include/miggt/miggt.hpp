#pragma once

#include "miggt/config.hpp"
#include "miggt/encoding.hpp"
#include "miggt/error.hpp"
#include "miggt/evaluation.hpp"
#include "miggt/graph.hpp"
#include "miggt/matrix.hpp"
#include "miggt/mgdn.hpp"
#include "miggt/model.hpp"
#include "miggt/objective.hpp"
#include "miggt/parameters.hpp"
#include "miggt/random.hpp"
#include "miggt/sgt.hpp"
#include "miggt/training.hpp"
