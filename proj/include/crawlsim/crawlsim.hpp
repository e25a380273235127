#pragma once

#include "crawlsim/config.hpp"
#include "crawlsim/crawl.hpp"
#include "crawlsim/errors.hpp"
#include "crawlsim/frontier.hpp"
#include "crawlsim/graph_store.hpp"
#include "crawlsim/manifest.hpp"
#include "crawlsim/metrics.hpp"
#include "crawlsim/rng.hpp"
#include "crawlsim/scorers.hpp"
#include "crawlsim/synth.hpp"
#include "crawlsim/util.hpp"
