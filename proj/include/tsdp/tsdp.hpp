#pragma once

#include "tsdp/closed_form.hpp"
#include "tsdp/colgen.hpp"
#include "tsdp/generate.hpp"
#include "tsdp/io.hpp"
#include "tsdp/lp.hpp"
#include "tsdp/markov.hpp"
#include "tsdp/metropolis.hpp"
#include "tsdp/simplex.hpp"
#include "tsdp/sparse_lu.hpp"
#include "tsdp/types.hpp"
