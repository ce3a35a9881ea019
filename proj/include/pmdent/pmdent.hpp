#pragma once

#include "pmdent/analysis.hpp"
#include "pmdent/errors.hpp"
#include "pmdent/pmdcore.hpp"
#include "pmdent/qinfo.hpp"
#include "pmdent/spectra.hpp"
#include "pmdent/state.hpp"
#include "pmdent/tomosim.hpp"
