#include "apklab/filter_expr.hpp"

#include <cctype>
#include <charconv>
#include <regex>

#include "apklab/errors.hpp"

namespace apklab {
namespace {

enum class TokKind { Ident, String, Int, Op, LParen, RParen, End };

struct Token {
    TokKind kind;
    std::string text;
    std::int64_t number = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ >= src_.size()) return {TokKind::End, ""};
        char c = src_[pos_];
        if (c == '(') { ++pos_; return {TokKind::LParen, "("}; }
        if (c == ')') { ++pos_; return {TokKind::RParen, ")"}; }
        if (c == '\'') return string_literal();
        if (c == '=' || c == '!' || c == '<' || c == '>') return op_token();
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))))
            return int_literal();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
        throw ParseError("expression: unexpected character '" + std::string(1, c) + "'");
    }

private:
    Token string_literal() {
        ++pos_;  // opening quote
        std::string out;
        while (pos_ < src_.size()) {
            char c = src_[pos_++];
            if (c == '\'') {
                if (pos_ < src_.size() && src_[pos_] == '\'') {
                    out += '\'';
                    ++pos_;
                    continue;
                }
                return {TokKind::String, out};
            }
            out += c;
        }
        throw ParseError("expression: unterminated string literal");
    }

    Token op_token() {
        char c = src_[pos_];
        bool eq = pos_ + 1 < src_.size() && src_[pos_ + 1] == '=';
        if (c == '=') {
            if (!eq) throw ParseError("expression: expected '==' not '='");
            pos_ += 2;
            return {TokKind::Op, "=="};
        }
        if (c == '!') {
            if (!eq) throw ParseError("expression: expected '!=' not '!'");
            pos_ += 2;
            return {TokKind::Op, "!="};
        }
        pos_ += eq ? 2 : 1;
        return {TokKind::Op, eq ? std::string(1, c) + "=" : std::string(1, c)};
    }

    Token int_literal() {
        std::size_t start = pos_;
        if (src_[pos_] == '-') ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string text = src_.substr(start, pos_ - start);
        std::int64_t value = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || p != text.data() + text.size())
            throw ParseError("expression: bad integer '" + text + "'");
        return {TokKind::Int, text, value};
    }

    Token ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')
                ++pos_;
            else
                break;
        }
        return {TokKind::Ident, src_.substr(start, pos_ - start)};
    }

    const std::string& src_;
    std::size_t pos_ = 0;
};

bool is_string_op(const std::string& s) {
    return s == "contains" || s == "startswith" || s == "endswith" || s == "matches";
}

bool is_compare_op(const std::string& s) {
    return s == "==" || s == "!=" || s == "<" || s == "<=" || s == ">" || s == ">=" ||
           is_string_op(s);
}

}  // namespace

struct Expression::Node {
    enum class Kind { Or, And, Not, Compare } kind = Kind::Compare;
    std::vector<std::shared_ptr<const Node>> children;

    struct Operand {
        enum class Kind { Field, String, Int } kind = Kind::Field;
        std::string text;
        std::int64_t number = 0;
    };
    Operand lhs, rhs;
    std::string op;
    std::optional<std::regex> pattern;  // compiled `matches` right side
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Operand = Node::Operand;

class Parser {
public:
    Parser(const std::string& src, std::vector<std::string>& fields)
        : lexer_(src), fields_(fields) {
        advance();
    }

    NodePtr parse() {
        NodePtr n = or_expr();
        if (tok_.kind != TokKind::End)
            throw ParseError("expression: trailing input at '" + tok_.text + "'");
        return n;
    }

private:
    void advance() { tok_ = lexer_.next(); }

    bool at_keyword(const std::string& kw) const {
        return tok_.kind == TokKind::Ident && tok_.text == kw;
    }

    NodePtr or_expr() {
        NodePtr left = and_expr();
        while (at_keyword("or")) {
            advance();
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Or;
            node->children = {left, and_expr()};
            left = node;
        }
        return left;
    }

    NodePtr and_expr() {
        NodePtr left = unary();
        while (at_keyword("and")) {
            advance();
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::And;
            node->children = {left, unary()};
            left = node;
        }
        return left;
    }

    NodePtr unary() {
        if (at_keyword("not")) {
            advance();
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Not;
            node->children = {unary()};
            return node;
        }
        if (tok_.kind == TokKind::LParen) {
            advance();
            NodePtr inner = or_expr();
            if (tok_.kind != TokKind::RParen) throw ParseError("expression: expected ')'");
            advance();
            return inner;
        }
        return comparison();
    }

    NodePtr comparison() {
        auto node = std::make_shared<Node>();
        Node* n = node.get();
        n->kind = Node::Kind::Compare;
        n->lhs = operand();
        if (!(tok_.kind == TokKind::Op || (tok_.kind == TokKind::Ident && is_string_op(tok_.text))))
            throw ParseError("expression: expected comparison operator, got '" + tok_.text + "'");
        if (!is_compare_op(tok_.text))
            throw ParseError("expression: unknown operator '" + tok_.text + "'");
        n->op = tok_.text;
        advance();
        n->rhs = operand();
        if (n->op == "matches") {
            if (n->rhs.kind != Operand::Kind::String)
                throw ParseError("expression: right side of 'matches' must be a string literal");
            try {
                n->pattern.emplace(n->rhs.text, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw ParseError("expression: bad regex '" + n->rhs.text + "': " + e.what());
            }
        }
        return node;
    }

    Operand operand() {
        Operand out;
        switch (tok_.kind) {
            case TokKind::Ident:
                if (is_compare_op(tok_.text) || tok_.text == "and" || tok_.text == "or" ||
                    tok_.text == "not")
                    throw ParseError("expression: '" + tok_.text + "' is reserved");
                out.kind = Operand::Kind::Field;
                out.text = tok_.text;
                note_field(tok_.text);
                break;
            case TokKind::String:
                out.kind = Operand::Kind::String;
                out.text = tok_.text;
                break;
            case TokKind::Int:
                out.kind = Operand::Kind::Int;
                out.number = tok_.number;
                break;
            default:
                throw ParseError("expression: expected field, string, or integer, got '" +
                                 tok_.text + "'");
        }
        advance();
        return out;
    }

    void note_field(const std::string& name) {
        for (const auto& f : fields_)
            if (f == name) return;
        fields_.push_back(name);
    }

    Lexer lexer_;
    Token tok_{TokKind::End, ""};
    std::vector<std::string>& fields_;
};

std::optional<FieldValue> resolve(const PluginRecord& record, const std::string& name) {
    if (name == "event_type") return FieldValue{record.event_type};
    if (auto it = record.fields.find(name); it != record.fields.end()) return it->second;
    return std::nullopt;
}

// nullopt = fault (missing field or type mismatch).
std::optional<bool> eval_compare(const Node& n, const PluginRecord& record) {
    auto value_of = [&](const Operand& o) -> std::optional<FieldValue> {
        switch (o.kind) {
            case Operand::Kind::Field: return resolve(record, o.text);
            case Operand::Kind::String: return FieldValue{o.text};
            case Operand::Kind::Int: return FieldValue{o.number};
        }
        return std::nullopt;
    };
    auto lhs = value_of(n.lhs);
    auto rhs = value_of(n.rhs);
    if (!lhs || !rhs) return std::nullopt;

    if (is_string_op(n.op)) {
        auto* ls = std::get_if<std::string>(&*lhs);
        auto* rs = std::get_if<std::string>(&*rhs);
        if (!ls || !rs) return std::nullopt;
        if (n.op == "contains") return ls->find(*rs) != std::string::npos;
        if (n.op == "startswith") return ls->rfind(*rs, 0) == 0;
        if (n.op == "endswith")
            return ls->size() >= rs->size() && ls->compare(ls->size() - rs->size(), rs->size(), *rs) == 0;
        return std::regex_search(*ls, *n.pattern);  // matches
    }

    if (lhs->index() != rhs->index()) return std::nullopt;
    int cmp;
    if (auto* ls = std::get_if<std::string>(&*lhs)) {
        const auto& rs = std::get<std::string>(*rhs);
        cmp = ls->compare(rs) < 0 ? -1 : (*ls == rs ? 0 : 1);
    } else {
        auto li = std::get<std::int64_t>(*lhs), ri = std::get<std::int64_t>(*rhs);
        cmp = li < ri ? -1 : (li == ri ? 0 : 1);
    }
    if (n.op == "==") return cmp == 0;
    if (n.op == "!=") return cmp != 0;
    if (n.op == "<") return cmp < 0;
    if (n.op == "<=") return cmp <= 0;
    if (n.op == ">") return cmp > 0;
    return cmp >= 0;  // >=
}

std::optional<bool> eval_node(const Node& n, const PluginRecord& record) {
    switch (n.kind) {
        case Node::Kind::Or:
            for (const auto& c : n.children) {
                auto v = eval_node(*c, record);
                if (!v) return std::nullopt;
                if (*v) return true;
            }
            return false;
        case Node::Kind::And:
            for (const auto& c : n.children) {
                auto v = eval_node(*c, record);
                if (!v) return std::nullopt;
                if (!*v) return false;
            }
            return true;
        case Node::Kind::Not: {
            auto v = eval_node(*n.children[0], record);
            if (!v) return std::nullopt;
            return !*v;
        }
        case Node::Kind::Compare: return eval_compare(n, record);
    }
    return std::nullopt;
}

}  // namespace

Expression Expression::parse(const std::string& source) {
    Expression e;
    e.source_ = source;
    Parser parser(source, e.fields_);
    e.root_ = parser.parse();
    return e;
}

std::optional<bool> Expression::evaluate(const PluginRecord& record) const {
    return eval_node(*root_, record);
}

}  // namespace apklab
