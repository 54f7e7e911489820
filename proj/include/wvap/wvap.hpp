#pragma once

#include "wvap/errors.hpp"
#include "wvap/operators.hpp"
#include "wvap/prepost.hpp"
#include "wvap/record.hpp"
#include "wvap/search.hpp"
#include "wvap/statevector.hpp"
