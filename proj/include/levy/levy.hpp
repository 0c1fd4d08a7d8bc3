#pragma once

#include "levy/autocorr.hpp"
#include "levy/crossover.hpp"
#include "levy/csv.hpp"
#include "levy/error.hpp"
#include "levy/estimation.hpp"
#include "levy/returns.hpp"
#include "levy/rng.hpp"
#include "levy/stable.hpp"
#include "levy/stable_table.hpp"
#include "levy/tlf.hpp"
#include "levy/version.hpp"
