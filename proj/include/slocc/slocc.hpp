#pragma once

#include "slocc/classify.hpp"
#include "slocc/dsl.hpp"
#include "slocc/enumerate.hpp"
#include "slocc/geometry.hpp"
#include "slocc/json_io.hpp"
#include "slocc/kcf.hpp"
#include "slocc/kronecker.hpp"
#include "slocc/normal_form.hpp"
#include "slocc/pencil.hpp"
#include "slocc/state_tensor.hpp"
#include "slocc/witness.hpp"
