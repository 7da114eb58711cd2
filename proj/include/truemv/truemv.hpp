#pragma once

#include "truemv/codec.hpp"
#include "truemv/disocclusion.hpp"
#include "truemv/error.hpp"
#include "truemv/eval.hpp"
#include "truemv/mvmap.hpp"
#include "truemv/search.hpp"
#include "truemv/seqio.hpp"
#include "truemv/synthgen.hpp"
