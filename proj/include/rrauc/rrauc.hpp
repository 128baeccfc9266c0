#pragma once

#include "rrauc/auc_loss.hpp"
#include "rrauc/bench.hpp"
#include "rrauc/data.hpp"
#include "rrauc/error.hpp"
#include "rrauc/io.hpp"
#include "rrauc/likelihood.hpp"
#include "rrauc/linalg.hpp"
#include "rrauc/metrics.hpp"
#include "rrauc/pgd.hpp"
#include "rrauc/random.hpp"
#include "rrauc/simgen.hpp"
