#pragma once

#include "bdris/channel.hpp"
#include "bdris/common.hpp"
#include "bdris/config.hpp"
#include "bdris/estimator.hpp"
#include "bdris/harness.hpp"
#include "bdris/model.hpp"
#include "bdris/trp_io.hpp"
#include "bdris/trp_select.hpp"
