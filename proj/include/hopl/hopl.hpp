#pragma once

#include "hopl/type.hpp"
#include "hopl/expr.hpp"
#include "hopl/print.hpp"
#include "hopl/subst.hpp"
#include "hopl/unify.hpp"
#include "hopl/basic.hpp"
#include "hopl/program.hpp"
#include "hopl/parser.hpp"
#include "hopl/frontend.hpp"
#include "hopl/engine.hpp"
#include "hopl/lattice.hpp"
#include "hopl/model.hpp"
#include "hopl/session.hpp"
