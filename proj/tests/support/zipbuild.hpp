#pragma once

#include <string>
#include <vector>

namespace testsupport {

// One archive member. Offsets, sizes and CRCs are computed by build_zip, so
// tests only state name, content and method.
struct ZipSpec {
    std::string name;
    std::string content;
    bool deflate = false;
};

// Writes a complete archive: local headers, central directory, EOCD. Built
// straight from the format description so it stays independent of the reader
// under test.
std::string build_zip(const std::vector<ZipSpec>& entries);

}  // namespace testsupport
