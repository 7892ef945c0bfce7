#pragma once

#include "twolane/core.hpp"
#include "twolane/diagnostics.hpp"
#include "twolane/harness.hpp"
#include "twolane/models.hpp"
#include "twolane/nonlocal.hpp"
#include "twolane/scheme.hpp"
#include "twolane/simulate.hpp"
