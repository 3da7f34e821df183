#pragma once

#include "pathent/chain.hpp"
#include "pathent/comsys.hpp"
#include "pathent/entropy.hpp"
#include "pathent/error.hpp"
#include "pathent/expm.hpp"
#include "pathent/maxent.hpp"
#include "pathent/model_document.hpp"
#include "pathent/models.hpp"
#include "pathent/report.hpp"
#include "pathent/sampler.hpp"
