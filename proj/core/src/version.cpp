#include "smell/version.hpp"

namespace smell {

std::string_view version() { return SMELL_VERSION; }

}  // namespace smell
