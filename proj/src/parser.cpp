// Recursive-descent parser for the field DSL.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | coordinate | call | '(' expr ')'
//   call    := name '(' expr (',' expr)* ')'
#include <cctype>
#include <charconv>

#include "ccnv/field.hpp"

namespace ccnv {

namespace {

class Parser {
public:
    Parser(std::string_view text, const Chart& chart) : s_(text), chart_(chart) {}

    ScalarField parse() {
        ScalarField f = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return f;
    }

private:
    std::string_view s_;
    const Chart& chart_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw ParseError(msg + " at position " + std::to_string(at), at);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= s_.size()) fail(std::string("expected '") + c + "' but input ended");
            fail(std::string("expected '") + c + "'");
        }
    }

    ScalarField expr() {
        ScalarField f = term();
        for (;;) {
            if (accept('+')) f = f + term();
            else if (accept('-')) f = f - term();
            else return f;
        }
    }

    ScalarField term() {
        ScalarField f = unary();
        for (;;) {
            if (accept('*')) f = f * unary();
            else if (accept('/')) f = f / unary();
            else return f;
        }
    }

    ScalarField unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    ScalarField power() {
        ScalarField base = primary();
        if (accept('^')) return pow(base, unary());
        return base;
    }

    double number() {
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }

    std::string_view identifier() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }

    double constant_argument(const char* fn) {
        std::size_t at = pos_;
        ScalarField f = expr();
        auto c = f.constant_value();
        if (!c) fail(std::string(fn) + " expects a numeric constant here", at);
        return *c;
    }

    ScalarField call(std::string_view name, std::size_t at) {
        if (name == "exp" || name == "log" || name == "sin" || name == "cos") {
            ScalarField a = expr();
            if (accept(',')) fail(std::string(name) + " takes 1 argument", at);
            expect(')');
            if (name == "exp") return exp(a);
            if (name == "log") return log(a);
            if (name == "sin") return sin(a);
            return cos(a);
        }
        if (name == "pow") {
            ScalarField a = expr();
            if (!accept(',')) fail("pow takes 2 arguments", at);
            ScalarField b = expr();
            if (accept(',')) fail("pow takes 2 arguments", at);
            expect(')');
            return pow(a, b);
        }
        if (name == "shift") {
            ScalarField a = expr();
            if (!accept(',')) fail("shift takes 2 arguments", at);
            double eps = constant_argument("shift");
            if (accept(',')) fail("shift takes 2 arguments", at);
            expect(')');
            return shift(a, eps);
        }
        if (name == "integral") {
            ScalarField a = expr();
            if (!accept(',')) fail("integral takes 3 arguments", at);
            skip_ws();
            std::size_t cat = pos_;
            auto label = identifier();
            auto coord = chart_.index_of(label);
            if (!coord) fail("integral expects a coordinate name", cat);
            if (!accept(',')) fail("integral takes 3 arguments", at);
            double lower = constant_argument("integral");
            if (accept(',')) fail("integral takes 3 arguments", at);
            expect(')');
            return antiderivative(a, *coord, lower);
        }
        fail("unknown function '" + std::string(name) + "'", at);
    }

    ScalarField primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            ScalarField f = expr();
            expect(')');
            return f;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t at = pos_;
            auto name = identifier();
            if (accept('(')) return call(name, at);
            if (auto coord = chart_.index_of(name)) return ScalarField::coordinate(*coord);
            fail("unknown identifier '" + std::string(name) + "'", at);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

}  // namespace

ScalarField parse_field(std::string_view text, const Chart& chart) {
    return Parser(text, chart).parse();
}

}  // namespace ccnv
