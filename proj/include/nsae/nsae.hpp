#pragma once

#include "embed.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "io.hpp"
#include "neighbors.hpp"
#include "net.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "synthdata.hpp"
#include "trainer.hpp"
#include "vecmath.hpp"
#include "version.hpp"
