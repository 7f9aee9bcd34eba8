#pragma once

// Umbrella header: the full storyboard toolchain.
//   lexer/parser/printer  - the storyboard language front end
//   model                 - resolved semantic model + well-formedness
//   flow/properties       - flow graph, taint propagation, security findings
//   interp                - dynamic oracle: execution + trace enumeration
//   codegen               - skeleton units + characterization test specs
//   driver                - command pipeline used by the CLI

#include "sema/ast.hpp"
#include "sema/codegen.hpp"
#include "sema/driver.hpp"
#include "sema/flow.hpp"
#include "sema/interp.hpp"
#include "sema/lexer.hpp"
#include "sema/model.hpp"
#include "sema/model_json.hpp"
#include "sema/parser.hpp"
#include "sema/printer.hpp"
#include "sema/properties.hpp"
#include "sema/source.hpp"
#include "sema/token.hpp"
#include "sema/util.hpp"
