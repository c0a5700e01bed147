#pragma once

#include <string>
#include <vector>

namespace resq {

// One validation finding, located by document path ("constraint.children[1].type").
struct Diagnostic {
    std::string path;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace resq
