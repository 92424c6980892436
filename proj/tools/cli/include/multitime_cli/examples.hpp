#pragma once

#include <string>
#include <vector>

namespace multitime::cli {

struct ShippedExample {
    std::string file_name;
    std::string text;
};

/// Example configurations compiled into the binary, sorted by file name.
const std::vector<ShippedExample>& shipped_examples();

}  // namespace multitime::cli
