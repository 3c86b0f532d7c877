#pragma once

#include "flgal/basis.hpp"
#include "flgal/estimator.hpp"
#include "flgal/io.hpp"
#include "flgal/model.hpp"
#include "flgal/rates.hpp"
#include "flgal/risk.hpp"
