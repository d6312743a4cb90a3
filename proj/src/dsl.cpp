#include "pbac/dsl.hpp"

#include <cctype>

namespace pbac::dsl {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Ok: return "no violation";
        case Outcome::Violation: return "violation";
        case Outcome::QuerySuccess: return "query succeeds";
        case Outcome::QueryFailure: return "query fails";
    }
    return "?";
}

namespace {

enum class Tok { Ident, Int, LParen, RParen, Comma, Dot, Plus, Minus, Question, At, LBrace,
                 RBrace, Equals, Comment, End };

struct Token {
    Tok kind;
    std::string text;
    int line;
    int col;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_ws();
        int line = line_, col = col_;
        if (pos_ >= text_.size()) return {Tok::End, "", line, col};
        char c = text_[pos_];
        if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
            advance(); advance();
            std::string body;
            while (pos_ < text_.size() && text_[pos_] != '\n') {
                body += text_[pos_];
                advance();
            }
            return {Tok::Comment, body, line, col};
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            // maximal munch: a '-' can never legally follow an atom, so any
            // '-' seen mid-identifier belongs to it (names like a--b or ab-)
            std::string id;
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if (!std::isalnum(static_cast<unsigned char>(d)) && d != '_' && d != '-') break;
                id += d;
                advance();
            }
            return {Tok::Ident, id, line, col};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                num += text_[pos_];
                advance();
            }
            return {Tok::Int, num, line, col};
        }
        advance();
        switch (c) {
            case '(': return {Tok::LParen, "(", line, col};
            case ')': return {Tok::RParen, ")", line, col};
            case ',': return {Tok::Comma, ",", line, col};
            case '.': return {Tok::Dot, ".", line, col};
            case '+': return {Tok::Plus, "+", line, col};
            case '-': return {Tok::Minus, "-", line, col};
            case '?': return {Tok::Question, "?", line, col};
            case '@': return {Tok::At, "@", line, col};
            case '{': return {Tok::LBrace, "{", line, col};
            case '}': return {Tok::RBrace, "}", line, col};
            case '=': return {Tok::Equals, "=", line, col};
        }
        throw SyntaxError(line, col, "a statement", "'" + std::string(1, c) + "'");
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            advance();
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { shift(); }

    Program parse() {
        Program p;
        while (cur_.kind != Tok::End) p.statements.push_back(statement());
        return p;
    }

private:
    void shift() { cur_ = lexer_.next(); }

    Token expect(Tok kind, const char* what) {
        if (cur_.kind != kind)
            throw SyntaxError(cur_.line, cur_.col, what,
                              cur_.kind == Tok::End ? "end of input" : "'" + cur_.text + "'");
        Token t = cur_;
        shift();
        return t;
    }

    Statement statement() {
        switch (cur_.kind) {
            case Tok::Comment: {
                CommentStmt c{cur_.text};
                shift();
                return c;
            }
            case Tok::Plus: {
                shift();
                AssertStmt a;
                a.fact = fact();
                if (cur_.kind == Tok::At) a.prov = annotation();
                expect(Tok::Dot, "'.'");
                return a;
            }
            case Tok::Minus: {
                shift();
                RetractStmt r{fact()};
                expect(Tok::Dot, "'.'");
                return r;
            }
            case Tok::Question: {
                shift();
                Token name = expect(Tok::Ident, "'lawful-request'");
                if (name.text != "lawful-request")
                    throw UnknownPredicate(name.line, name.col, name.text);
                QueryStmt q{args4(name)};
                expect(Tok::Dot, "'.'");
                return q;
            }
            case Tok::Ident: {
                Token name = cur_;
                shift();
                TriggerStmt t;
                if (name.text == "make-request") t.name = TriggerName::MakeRequest;
                else if (name.text == "process") t.name = TriggerName::Process;
                else throw UnknownPredicate(name.line, name.col, name.text);
                t.args = args4(name);
                expect(Tok::Dot, "'.'");
                return t;
            }
            default:
                throw SyntaxError(cur_.line, cur_.col, "'+', '-', '?', a trigger or a comment",
                                  cur_.kind == Tok::End ? "end of input" : "'" + cur_.text + "'");
        }
    }

    Fact fact() {
        Token name = expect(Tok::Ident, "a predicate name");
        std::vector<Atom> args = arg_list();
        try {
            if (auto f = Fact::from_predicate(name.text, args)) return *f;
        } catch (const MalformedFact& e) {
            throw SyntaxError(name.line, name.col, std::string("well-formed ") + name.text,
                              e.what());
        }
        throw UnknownPredicate(name.line, name.col, name.text);
    }

    std::vector<Atom> arg_list() {
        expect(Tok::LParen, "'('");
        std::vector<Atom> args;
        args.push_back(expect(Tok::Ident, "an atom").text);
        while (cur_.kind == Tok::Comma) {
            shift();
            args.push_back(expect(Tok::Ident, "an atom").text);
        }
        expect(Tok::RParen, "')'");
        return args;
    }

    std::array<Atom, 4> args4(const Token& name) {
        std::vector<Atom> args = arg_list();
        if (args.size() != 4)
            throw SyntaxError(name.line, name.col, "exactly 4 arguments",
                              std::to_string(args.size()) + " arguments");
        return {args[0], args[1], args[2], args[3]};
    }

    ProvAnnotation annotation() {
        expect(Tok::At, "'@'");
        expect(Tok::LBrace, "'{'");
        ProvAnnotation ann;
        bool have_by = false, have_cap = false;
        while (true) {
            Token key = expect(Tok::Ident, "'by', 'cap' or 'exp'");
            expect(Tok::Equals, "'='");
            if (key.text == "by") {
                ann.by = expect(Tok::Ident, "an atom").text;
                have_by = true;
            } else if (key.text == "cap") {
                Token v = expect(Tok::Ident, "a capability");
                auto cap = capability_from_string(v.text);
                if (!cap)
                    throw SyntaxError(v.line, v.col,
                                      "one of Control, Qualify, Collect, Perform, Consent",
                                      "'" + v.text + "'");
                ann.cap = *cap;
                have_cap = true;
            } else if (key.text == "exp") {
                ann.exp = std::stoll(expect(Tok::Int, "a unix timestamp").text);
            } else {
                throw SyntaxError(key.line, key.col, "'by', 'cap' or 'exp'", "'" + key.text + "'");
            }
            if (cur_.kind != Tok::Comma) break;
            shift();
        }
        Token close = expect(Tok::RBrace, "'}'");
        if (!have_by || !have_cap)
            throw SyntaxError(close.line, close.col, "'by' and 'cap' entries", "'}'");
        return ann;
    }

    Lexer lexer_;
    Token cur_{Tok::End, "", 1, 1};
};

std::string tuple4(const char* name, const std::array<Atom, 4>& a) {
    return std::string(name) + "(" + a[0] + "," + a[1] + "," + a[2] + "," + a[3] + ")";
}

}  // namespace

Program parse_program(const std::string& text) {
    return Parser(text).parse();
}

Fact parse_fact(const std::string& text) {
    Program p = parse_program("+" + text + ".");
    if (p.statements.size() != 1)
        throw SyntaxError(1, 1, "a single fact", "'" + text + "'");
    return std::get<AssertStmt>(p.statements.front()).fact;
}

std::string format_statement(const Statement& s) {
    struct Fmt {
        std::string operator()(const AssertStmt& a) const {
            std::string out = "+" + a.fact.to_string();
            if (a.prov) {
                out += " @ {by=" + a.prov->by + ",cap=" + to_string(a.prov->cap);
                if (a.prov->exp) out += ",exp=" + std::to_string(*a.prov->exp);
                out += "}";
            }
            return out + ".";
        }
        std::string operator()(const RetractStmt& r) const { return "-" + r.fact.to_string() + "."; }
        std::string operator()(const TriggerStmt& t) const {
            return tuple4(t.name == TriggerName::MakeRequest ? "make-request" : "process",
                          t.args) + ".";
        }
        std::string operator()(const QueryStmt& q) const {
            return "?" + tuple4("lawful-request", q.args) + ".";
        }
        std::string operator()(const CommentStmt& c) const { return "//" + c.text; }
    };
    return std::visit(Fmt{}, s);
}

std::string format_program(const Program& p) {
    std::string out;
    for (const Statement& s : p.statements) {
        out += format_statement(s);
        out += '\n';
    }
    return out;
}

Provenance provenance_for(const AssertStmt& stmt, const ExecOptions& opts) {
    Provenance prov;
    if (stmt.prov) {
        prov.asserted_by = stmt.prov->by;
        prov.capability = stmt.prov->cap;
        prov.expires_at = stmt.prov->exp;
    } else {
        prov.asserted_by = opts.default_by;
        prov.capability = default_capability_for(stmt.fact.kind);
    }
    prov.asserted_at = opts.clock();
    return prov;
}

std::vector<Outcome> Trace::outcomes() const {
    std::vector<Outcome> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.outcome);
    return out;
}

bool Trace::clean() const {
    for (const auto& e : entries)
        if (e.outcome == Outcome::Violation || e.outcome == Outcome::QueryFailure) return false;
    return true;
}

std::pair<Trace, PurposeGraph> execute_program(const Program& p, PurposeGraph g,
                                               const ExecOptions& opts) {
    Trace trace;
    std::vector<Request> requests;
    std::uint64_t next_id = 0;

    auto matching_request = [&requests](const std::array<Atom, 4>& a) {
        for (const Request& r : requests)
            if (r.actor == a[0] && r.action == a[1] && r.purpose == a[2] && r.asset == a[3])
                return true;
        return false;
    };

    for (const Statement& s : p.statements) {
        if (std::holds_alternative<CommentStmt>(s)) continue;
        TraceEntry entry{Outcome::Ok, format_statement(s), ""};

        if (const auto* a = std::get_if<AssertStmt>(&s)) {
            try {
                g = assert_fact(g, a->fact, provenance_for(*a, opts), opts.enforce_capabilities);
            } catch (const Error& e) {
                entry.outcome = Outcome::Violation;
                entry.detail = e.what();
            }
        } else if (const auto* r = std::get_if<RetractStmt>(&s)) {
            Provenance prov{opts.default_by, default_capability_for(r->fact.kind), opts.clock()};
            try {
                g = retract_fact(g, r->fact, prov, opts.enforce_capabilities);
            } catch (const Error& e) {
                entry.outcome = Outcome::Violation;
                entry.detail = e.what();
            }
        } else if (const auto* t = std::get_if<TriggerStmt>(&s)) {
            if (t->name == TriggerName::MakeRequest) {
                requests.push_back({t->args[0], t->args[1], t->args[2], t->args[3],
                                    "r" + std::to_string(++next_id)});
            } else {  // process: lawful only if it was requested and is permitted
                bool ok = matching_request(t->args) &&
                          decide_request(g, {t->args[0], t->args[1], t->args[2], t->args[3], "q"})
                              .permitted();
                entry.outcome = ok ? Outcome::Ok : Outcome::Violation;
            }
        } else if (const auto* q = std::get_if<QueryStmt>(&s)) {
            bool ok = matching_request(q->args) &&
                      decide_request(g, {q->args[0], q->args[1], q->args[2], q->args[3], "q"})
                          .permitted();
            entry.outcome = ok ? Outcome::QuerySuccess : Outcome::QueryFailure;
        }

        trace.entries.push_back(std::move(entry));
    }

    trace.final_graph_version = g.version();
    return {std::move(trace), std::move(g)};
}

}  // namespace pbac::dsl
