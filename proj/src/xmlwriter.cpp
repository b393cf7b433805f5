#include "apklab/xmlwriter.hpp"

#include "apklab/errors.hpp"

namespace apklab {

std::string xml_escape(const std::string& text, bool attribute) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x20 && c != '\t' && c != '\n' && c != '\r') {
            out += "\xef\xbf\xbd";  // U+FFFD
            continue;
        }
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"':
                if (attribute)
                    out += "&quot;";
                else
                    out += c;
                break;
            default: out += c;
        }
    }
    return out;
}

XmlWriter::XmlWriter() { out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"; }

void XmlWriter::indent() { out_.append(stack_.size() * 2, ' '); }

void XmlWriter::start_tag(const std::string& tag, const XmlAttrs& attrs) {
    out_ += '<';
    out_ += tag;
    for (const auto& [k, v] : attrs) {
        out_ += ' ';
        out_ += k;
        out_ += "=\"";
        out_ += xml_escape(v, true);
        out_ += '"';
    }
}

void XmlWriter::open(const std::string& tag, const XmlAttrs& attrs) {
    indent();
    start_tag(tag, attrs);
    out_ += ">\n";
    stack_.push_back(tag);
}

void XmlWriter::close() {
    if (stack_.empty()) throw Error("xml: close without open");
    std::string tag = stack_.back();
    stack_.pop_back();
    indent();
    out_ += "</";
    out_ += tag;
    out_ += ">\n";
}

void XmlWriter::self_close(const std::string& tag, const XmlAttrs& attrs) {
    indent();
    start_tag(tag, attrs);
    out_ += "/>\n";
}

void XmlWriter::text_element(const std::string& tag, const XmlAttrs& attrs,
                             const std::string& text) {
    indent();
    start_tag(tag, attrs);
    out_ += '>';
    out_ += xml_escape(text, false);
    out_ += "</";
    out_ += tag;
    out_ += ">\n";
}

const std::string& XmlWriter::str() const {
    if (!stack_.empty()) throw Error("xml: unclosed element '" + stack_.back() + "'");
    return out_;
}

}  // namespace apklab
