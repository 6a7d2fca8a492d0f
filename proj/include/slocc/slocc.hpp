// Convenience umbrella header.
#pragma once

#include "slocc/linalg.hpp"
#include "slocc/tensor.hpp"
#include "slocc/realign.hpp"
#include "slocc/canonical.hpp"
#include "slocc/search.hpp"
#include "slocc/classify.hpp"
#include "slocc/catalog.hpp"
