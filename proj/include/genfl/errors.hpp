#pragma once

#include <stdexcept>

namespace genfl {

// File-system level failure (open/read/write/rename), as opposed to parse or
// validation problems in the file's content.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace genfl
