// SPDX-License-Identifier: Apache-2.0
//
// Reader and writer for the `csp-set v1` constraint-set format.

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cspt/error.hpp"
#include "cspt/templates.hpp"

namespace cspt {
namespace {

struct Token {
    enum Kind { Word, LParen, RParen, Comma, Slash, End } kind = End;
    std::string text;
    int line = 0;
    int column = 0;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    int line = 1;
    int column = 1;
    std::size_t i = 0;
    auto advance = [&] {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
        ++i;
    };
    while (i < text.size()) {
        char ch = text[i];
        if (ch == '#') {
            while (i < text.size() && text[i] != '\n') {
                advance();
            }
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            advance();
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = column;
        switch (ch) {
        case '(': tok.kind = Token::LParen; break;
        case ')': tok.kind = Token::RParen; break;
        case ',': tok.kind = Token::Comma; break;
        case '/': tok.kind = Token::Slash; break;
        default: break;
        }
        if (tok.kind != Token::End) {
            tok.text = std::string(1, ch);
            advance();
            out.push_back(std::move(tok));
            continue;
        }
        auto word_char = [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        };
        if (!word_char(ch)) {
            fail(ErrorCode::SyntaxError, std::to_string(line) + ":" + std::to_string(column) +
                                             ": unexpected character '" + std::string(1, ch) + "'");
        }
        tok.kind = Token::Word;
        while (i < text.size() && word_char(text[i])) {
            tok.text += text[i];
            advance();
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.line = line;
    end.column = column;
    out.push_back(end);
    return out;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            return false;
        }
    }
    return true;
}

bool is_keyword(std::string_view s) {
    return s == "name" || s == "domain" || s == "arity" || s == "constraint";
}

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

    ConstraintSet parse() {
        expect_word("csp-set");
        const Token& version = next();
        if (version.kind != Token::Word || version.text != "v1") {
            syntax(version, "expected format version 'v1'");
        }

        std::optional<std::string> name;
        std::optional<int> t;
        std::optional<int> k;
        std::vector<ConstraintTemplate> templates;
        std::vector<std::optional<Rational>> weights;

        while (peek().kind != Token::End) {
            const Token& kw = next();
            if (kw.kind != Token::Word) {
                syntax(kw, "expected a statement keyword");
            }
            if (kw.text == "name") {
                const Token& id = next();
                if (id.kind != Token::Word || !is_identifier(id.text)) {
                    syntax(id, "expected an identifier after 'name'");
                }
                if (name) {
                    semantic(kw, "'name' given twice");
                }
                name = id.text;
            } else if (kw.text == "domain" || kw.text == "arity") {
                if (!templates.empty()) {
                    semantic(kw, "'" + kw.text + "' must precede the constraint blocks");
                }
                auto& slot = kw.text == "domain" ? t : k;
                if (slot) {
                    semantic(kw, "'" + kw.text + "' given twice");
                }
                slot = integer(next());
            } else if (kw.text == "constraint") {
                if (!t || !k) {
                    semantic(kw, "'domain' and 'arity' must precede the constraint blocks");
                }
                try {
                    tuple_space(*t, *k);
                } catch (const Error& e) {
                    semantic(kw, e.what());
                }
                parse_block(kw, *t, *k, templates, weights);
            } else {
                syntax(kw, "unknown statement '" + kw.text + "'");
            }
        }
        const Token& end = peek();
        if (!name) {
            semantic(end, "missing 'name'");
        }
        if (!t || !k) {
            semantic(end, "missing 'domain' or 'arity'");
        }
        if (templates.empty()) {
            semantic(end, "no constraint blocks");
        }
        std::optional<std::vector<Rational>> ws;
        std::size_t weighted = 0;
        for (const auto& w : weights) {
            weighted += w.has_value() ? 1 : 0;
        }
        if (weighted != 0 && weighted != weights.size()) {
            semantic(end, "weights must be given for every template or for none");
        }
        if (weighted != 0) {
            ws.emplace();
            for (const auto& w : weights) {
                ws->push_back(*w);
            }
        }
        try {
            return ConstraintSet(*name, *t, *k, std::move(templates), std::move(ws));
        } catch (const Error& e) {
            semantic(end, e.what());
        }
    }

private:
    void parse_block(const Token& kw, int t, int k, std::vector<ConstraintTemplate>& templates,
                     std::vector<std::optional<Rational>>& weights) {
        const Token& id = next();
        if (id.kind != Token::Word || !is_identifier(id.text) || is_keyword(id.text)) {
            syntax(id, "expected a template name after 'constraint'");
        }
        std::optional<Rational> weight;
        const Token* mode = &next();
        if (mode->kind == Token::Word && mode->text == "weight") {
            const Token& num_tok = next();
            std::int64_t num = integer(num_tok);
            std::int64_t den = 1;
            if (peek().kind == Token::Slash) {
                next();
                den = integer(next());
            }
            if (num <= 0 || den <= 0) {
                semantic(num_tok, "weights must be positive");
            }
            weight = Rational::make(num, den);
            mode = &next();
        }
        if (mode->kind != Token::Word || (mode->text != "forbid" && mode->text != "allow")) {
            syntax(*mode, "expected 'forbid' or 'allow'");
        }
        std::vector<Tuple> tuples;
        while (peek().kind == Token::LParen) {
            const Token& open = next();
            Tuple tuple;
            while (true) {
                const Token& v = next();
                std::int64_t value = integer(v);
                if (value >= t) {
                    semantic(v, "entry " + v.text + " outside domain of size " + std::to_string(t));
                }
                tuple.push_back(static_cast<Value>(value));
                const Token& sep = next();
                if (sep.kind == Token::RParen) {
                    break;
                }
                if (sep.kind != Token::Comma) {
                    syntax(sep, "expected ',' or ')' in tuple");
                }
            }
            if (tuple.size() != static_cast<std::size_t>(k)) {
                semantic(open, "tuple " + format_tuple(tuple) + " does not have arity " + std::to_string(k));
            }
            tuples.push_back(std::move(tuple));
        }
        for (const auto& c : templates) {
            if (c.name() == id.text) {
                semantic(id, "duplicate template name '" + id.text + "'");
            }
        }
        try {
            templates.push_back(mode->text == "forbid"
                                    ? ConstraintTemplate::from_forbidden(id.text, t, k, tuples)
                                    : ConstraintTemplate::from_allowed(id.text, t, k, tuples));
        } catch (const Error& e) {
            semantic(kw, e.what());
        }
        weights.push_back(weight);
    }

    std::int64_t integer(const Token& tok) {
        if (tok.kind != Token::Word) {
            syntax(tok, "expected an integer");
        }
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
        if (ec != std::errc() || ptr != tok.text.data() + tok.text.size() || value < 0) {
            syntax(tok, "expected a non-negative integer, got '" + tok.text + "'");
        }
        return value;
    }

    void expect_word(std::string_view word) {
        const Token& tok = next();
        if (tok.kind != Token::Word || tok.text != word) {
            syntax(tok, "expected '" + std::string(word) + "'");
        }
    }

    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() {
        const Token& tok = tokens_[pos_];
        if (tok.kind != Token::End) {
            ++pos_;
        }
        return tok;
    }

    [[noreturn]] static void syntax(const Token& at, const std::string& msg) {
        fail(ErrorCode::SyntaxError, location(at) + msg);
    }
    [[noreturn]] static void semantic(const Token& at, const std::string& msg) {
        fail(ErrorCode::SemanticError, location(at) + msg);
    }
    static std::string location(const Token& at) {
        return std::to_string(at.line) + ":" + std::to_string(at.column) + ": ";
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

} // namespace

ConstraintSet parse_constraint_set(std::string_view text) {
    return Parser(text).parse();
}

ConstraintSet load_constraint_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::IoError, "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_constraint_set(buf.str());
}

std::string serialize_constraint_set(const ConstraintSet& cs) {
    std::ostringstream out;
    out << "csp-set v1\n";
    out << "name " << cs.name() << '\n';
    out << "domain " << cs.domain_size() << '\n';
    out << "arity " << cs.arity() << '\n';
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const auto& c = cs[i];
        out << "constraint " << c.name();
        if (cs.weights()) {
            const auto& w = (*cs.weights())[i];
            out << " weight " << w.num << '/' << w.den;
        }
        const std::size_t sat = c.satisfying_count();
        const bool use_forbid = c.tuple_count() - sat <= sat;
        out << (use_forbid ? " forbid" : " allow");
        for (const auto& tuple : use_forbid ? c.forbidden_tuples() : c.satisfying_tuples()) {
            out << ' ' << format_tuple(tuple);
        }
        out << '\n';
    }
    return out.str();
}

} // namespace cspt
