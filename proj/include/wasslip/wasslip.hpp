#pragma once

#include "wasslip/error.hpp"
#include "wasslip/rng.hpp"
#include "wasslip/numerics.hpp"
#include "wasslip/lp.hpp"
#include "wasslip/measures.hpp"
#include "wasslip/models.hpp"
#include "wasslip/robust.hpp"
#include "wasslip/adversarial.hpp"
#include "wasslip/train.hpp"
#include "wasslip/data.hpp"
#include "wasslip/model_io.hpp"
