#pragma once

#include "bcones/behavior.hpp"
#include "bcones/errors.hpp"
#include "bcones/linalg.hpp"
#include "bcones/mpum.hpp"
#include "bcones/nnrank.hpp"
#include "bcones/pecheck.hpp"
#include "bcones/statespace.hpp"
