#pragma once

#include <string>
#include <utility>
#include <vector>

namespace apklab {

using XmlAttrs = std::vector<std::pair<std::string, std::string>>;

// Escapes &, <, > (and " inside attribute values). Control characters XML
// 1.0 cannot represent are replaced with U+FFFD so the document stays
// well-formed whatever bytes a record carries.
std::string xml_escape(const std::string& text, bool attribute);

// Emits an indented UTF-8 document with a declaration line. Deterministic
// output: callers control attribute order, indentation is two spaces per
// depth, newline after every tag.
class XmlWriter {
public:
    XmlWriter();

    void open(const std::string& tag, const XmlAttrs& attrs = {});
    void close();
    void self_close(const std::string& tag, const XmlAttrs& attrs = {});
    void text_element(const std::string& tag, const XmlAttrs& attrs, const std::string& text);

    // Valid once every open() is matched by close().
    const std::string& str() const;

private:
    void indent();
    void start_tag(const std::string& tag, const XmlAttrs& attrs);

    std::string out_;
    std::vector<std::string> stack_;
};

}  // namespace apklab
