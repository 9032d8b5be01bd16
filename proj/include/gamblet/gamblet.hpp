#pragma once

#include "gamblet/error.hpp"
#include "gamblet/numerics.hpp"
#include "gamblet/matrix_io.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/operators.hpp"
#include "gamblet/gamblets.hpp"
#include "gamblet/denoise.hpp"
#include "gamblet/graph.hpp"
#include "gamblet/storage.hpp"
#include "gamblet/experiment.hpp"
