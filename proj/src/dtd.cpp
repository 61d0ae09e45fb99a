#include "treesat/dtd.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "treesat/errors.hpp"

namespace fs = std::filesystem;

namespace treesat {

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw UnknownSchemaFile("cannot open schema file " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool name_start(int c) { return c >= 0 && (std::isalpha(c) || c == '_' || c == ':' || c >= 0x80); }
bool name_char(int c) {
    return c >= 0 && (std::isalnum(c) || c == '_' || c == ':' || c == '.' || c == '-' || c >= 0x80);
}

struct Source {
    std::string text;
    std::size_t pos = 0;
    std::string file;  // for messages
    fs::path dir;      // base for relative system identifiers
    int line = 1;
    int column = 1;
};

struct ParamEntity {
    std::string value;
    bool external = false;
    std::string system_id;
    fs::path dir;
};

struct AttDecl {
    std::string name;
    bool required;
};

class DtdParser {
public:
    DtdParser(const fs::path& root_dir, DtdInfo* info) : root_dir_(root_dir), info_(info) {}

    TypePtr run(std::string text, const std::string& file, const std::string& root) {
        Source s;
        s.text = std::move(text);
        s.file = file;
        s.dir = root_dir_;
        stack_.push_back(std::move(s));
        declarations();
        return build(root);
    }

private:
    // ------------------------------------------------------------- reading

    Source& top() { return stack_.back(); }

    void pop_exhausted() {
        while (stack_.size() > 1 && top().pos >= top().text.size()) stack_.pop_back();
    }

    int peek() {
        pop_exhausted();
        const Source& s = stack_.back();
        return s.pos < s.text.size() ? static_cast<unsigned char>(s.text[s.pos]) : -1;
    }

    int get() {
        int c = peek();
        if (c < 0) return c;
        Source& s = top();
        ++s.pos;
        if (c == '\n') {
            ++s.line;
            s.column = 1;
        } else {
            ++s.column;
        }
        return c;
    }

    bool starts(const char* lit) {
        pop_exhausted();
        const Source& s = stack_.back();
        return s.text.compare(s.pos, std::char_traits<char>::length(lit), lit) == 0;
    }

    void skip_lit(const char* lit) {
        for (std::size_t i = 0, n = std::char_traits<char>::length(lit); i < n; ++i) get();
    }

    [[noreturn]] void fail(const std::string& msg) {
        // report against the innermost file, not entity replacement text
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
            if (!it->file.empty()) throw ParseError(it->file + ": " + msg, it->line, it->column);
        throw ParseError(msg, 0, 0);
    }

    void warn(const std::string& msg) {
        if (info_) info_->warnings.push_back(msg);
    }

    // Whitespace, with parameter-entity references expanded in place.
    void skip_space() {
        for (;;) {
            int c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                get();
            } else if (c == '%' && pe_ref_ahead()) {
                expand_pe();
            } else {
                return;
            }
        }
    }

    bool pe_ref_ahead() {
        const Source& s = stack_.back();
        return s.pos + 1 < s.text.size() && name_start(static_cast<unsigned char>(s.text[s.pos + 1]));
    }

    std::string name() {
        skip_space();
        if (!name_start(peek())) fail("name expected");
        std::string out;
        while (name_char(peek())) out += static_cast<char>(get());
        return out;
    }

    void expand_pe() {
        get();  // '%'
        std::string n;
        while (name_char(peek())) n += static_cast<char>(get());
        if (peek() != ';') fail("';' expected after parameter entity reference %" + n);
        get();
        auto it = pes_.find(n);
        if (it == pes_.end()) fail("undeclared parameter entity %" + n + ";");
        if (stack_.size() > 64) fail("parameter entity nesting too deep at %" + n + ";");
        push_entity(n, it->second);
    }

    void push_entity(const std::string& n, const ParamEntity& pe) {
        Source s;
        if (pe.external) {
            fs::path p = resolve(pe.system_id, pe.dir);
            s.text = " " + strip_text_decl(read_file(p)) + " ";
            s.file = p.filename().string();
            s.dir = p.parent_path();
        } else {
            s.text = " " + pe.value + " ";
            s.dir = pe.dir;
            (void)n;
        }
        stack_.push_back(std::move(s));
    }

    static std::string strip_text_decl(std::string text) {
        if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
        return text;
    }

    fs::path resolve(const std::string& system_id, const fs::path& dir) {
        std::string sid = system_id;
        auto slash = sid.find_last_of('/');
        std::string base = slash == std::string::npos ? sid : sid.substr(slash + 1);
        std::vector<fs::path> candidates;
        if (sid.find("://") == std::string::npos) candidates.push_back(dir / sid);
        candidates.push_back(dir / base);
        candidates.push_back(root_dir_ / base);
        for (const auto& c : candidates)
            if (fs::is_regular_file(c)) return c;
        throw UnknownSchemaFile("external entity \"" + system_id + "\" not found next to " + dir.string());
    }

    // Quoted literal. Entity values get parameter-entity and character
    // references expanded; other literals are returned raw.
    std::string literal(bool entity_value) {
        skip_space();
        int q = peek();
        if (q != '"' && q != '\'') fail("quoted literal expected");
        get();
        std::size_t depth = stack_.size();
        std::string out;
        for (;;) {
            if (stack_.size() == depth) {
                Source& s = top();
                if (s.pos >= s.text.size()) fail("unterminated literal");
                if (static_cast<unsigned char>(s.text[s.pos]) == q) {
                    get();
                    break;
                }
            }
            int c = peek();
            if (c < 0) fail("unterminated literal");
            if (entity_value && c == '%' && pe_ref_ahead()) {
                get();
                std::string n;
                while (name_char(peek())) n += static_cast<char>(get());
                if (peek() == ';') get();
                auto it = pes_.find(n);
                if (it == pes_.end()) fail("undeclared parameter entity %" + n + ";");
                if (it->second.external) out += read_file(resolve(it->second.system_id, it->second.dir));
                else out += it->second.value;
                continue;
            }
            if (entity_value && c == '&' && starts("&#")) {
                std::string ref;
                while (peek() >= 0 && peek() != ';') ref += static_cast<char>(get());
                get();
                unsigned long code = ref.size() > 2 && (ref[2] == 'x' || ref[2] == 'X')
                                         ? std::stoul(ref.substr(3), nullptr, 16)
                                         : std::stoul(ref.substr(2));
                append_utf8(out, code);
                continue;
            }
            out += static_cast<char>(get());
        }
        return out;
    }

    static void append_utf8(std::string& out, unsigned long c) {
        if (c < 0x80) {
            out += static_cast<char>(c);
        } else if (c < 0x800) {
            out += static_cast<char>(0xC0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3F));
        } else if (c < 0x10000) {
            out += static_cast<char>(0xE0 | (c >> 12));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (c & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (c >> 18));
            out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (c & 0x3F));
        }
    }

    void skip_until(const char* end) {
        while (peek() >= 0 && !starts(end)) get();
        if (peek() < 0) fail(std::string("missing '") + end + "'");
        skip_lit(end);
    }

    void expect(char c) {
        skip_space();
        if (peek() != c) fail(std::string("'") + c + "' expected");
        get();
    }

    // -------------------------------------------------------- declarations

    void declarations() {
        for (;;) {
            skip_space();
            if (peek() < 0) break;
            if (starts("<!--")) {
                skip_until("-->");
            } else if (starts("<?")) {
                skip_until("?>");
            } else if (starts("<![")) {
                conditional();
            } else if (starts("]]>")) {
                if (open_sections_ == 0) fail("']]>' without an open conditional section");
                --open_sections_;
                skip_lit("]]>");
            } else if (starts("<!ELEMENT")) {
                skip_lit("<!ELEMENT");
                element_decl();
            } else if (starts("<!ATTLIST")) {
                skip_lit("<!ATTLIST");
                attlist_decl();
            } else if (starts("<!ENTITY")) {
                skip_lit("<!ENTITY");
                entity_decl();
            } else if (starts("<!NOTATION")) {
                warn("NOTATION declaration ignored");
                skip_until(">");
            } else {
                fail("markup declaration expected");
            }
        }
        if (open_sections_ > 0) fail("unterminated conditional section");
    }

    void conditional() {
        skip_lit("<![");
        std::string kw = name();
        expect('[');
        if (kw == "INCLUDE") {
            ++open_sections_;
            return;
        }
        if (kw != "IGNORE") fail("INCLUDE or IGNORE expected, found " + kw);
        int depth = 1;
        while (depth > 0) {
            if (peek() < 0) fail("unterminated IGNORE section");
            if (starts("<![")) {
                skip_lit("<![");
                ++depth;
            } else if (starts("]]>")) {
                skip_lit("]]>");
                --depth;
            } else {
                get();
            }
        }
    }

    void entity_decl() {
        skip_space();
        bool parameter = false;
        if (peek() == '%') {
            get();
            parameter = true;
        }
        std::string n = name();
        skip_space();
        ParamEntity pe;
        pe.dir = top().dir;
        if (starts("SYSTEM")) {
            skip_lit("SYSTEM");
            pe.external = true;
            pe.system_id = literal(false);
        } else if (starts("PUBLIC")) {
            skip_lit("PUBLIC");
            literal(false);
            pe.external = true;
            pe.system_id = literal(false);
        } else {
            pe.value = literal(parameter);
        }
        skip_space();
        if (starts("NDATA")) {
            skip_lit("NDATA");
            name();
        }
        expect('>');
        if (parameter) pes_.emplace(n, std::move(pe));  // first declaration wins
    }

    void attlist_decl() {
        std::string elem = name();
        auto& decls = attlists_[elem];
        for (;;) {
            skip_space();
            if (peek() == '>') {
                get();
                return;
            }
            std::string att = name();
            skip_space();
            if (peek() == '(') {
                skip_group();
            } else {
                std::string type = name();
                if (type == "NOTATION") {
                    skip_space();
                    skip_group();
                }
            }
            skip_space();
            bool required = false;
            if (peek() == '#') {
                get();
                std::string d = name();
                if (d == "REQUIRED") {
                    required = true;
                } else if (d == "FIXED") {
                    required = true;
                    literal(false);
                } else if (d != "IMPLIED") {
                    fail("unknown attribute default #" + d);
                }
            } else {
                literal(false);
            }
            // namespace declarations are not attributes in the namespace data model
            if (att == "xmlns" || att.rfind("xmlns:", 0) == 0) continue;
            bool seen = false;
            for (const auto& a : decls) seen = seen || a.name == att;
            if (!seen) decls.push_back({att, required});
            attribute_names_.insert(att);
        }
    }

    void skip_group() {
        expect('(');
        int depth = 1;
        while (depth > 0) {
            skip_space();
            int c = get();
            if (c < 0) fail("unterminated group");
            if (c == '(') ++depth;
            if (c == ')') --depth;
        }
    }

    void element_decl() {
        std::string n = name();
        skip_space();
        TypePtr content;
        bool any = false;
        if (starts("EMPTY")) {
            skip_lit("EMPTY");
            content = tt::empty();
        } else if (starts("ANY")) {
            skip_lit("ANY");
            any = true;
        } else {
            expect('(');
            skip_space();
            if (starts("#PCDATA")) content = mixed();
            else content = group_rest();
        }
        expect('>');
        if (elements_.count(n)) {
            warn("element " + n + " declared more than once; first declaration kept");
            return;
        }
        order_.push_back(n);
        elements_[n] = content;
        if (any) any_.insert(n);
    }

    TypePtr mixed() {
        skip_lit("#PCDATA");
        std::vector<std::string> names;
        for (;;) {
            skip_space();
            if (peek() == '|') {
                get();
                names.push_back(name());
                referenced_.insert(names.back());
            } else {
                break;
            }
        }
        expect(')');
        if (peek() == '*') get();
        if (names.empty()) return tt::empty();
        TypePtr alts;
        for (const auto& x : names) alts = alts ? tt::alt(alts, tt::var(x)) : tt::var(x);
        return star(alts);
    }

    // After '(' of a children content model.
    TypePtr group_rest() {
        std::vector<TypePtr> items{particle()};
        char sep = 0;
        for (;;) {
            skip_space();
            int c = peek();
            if (c == ')') {
                get();
                break;
            }
            if (c != '|' && c != ',') fail("',' '|' or ')' expected in content model");
            if (sep && c != sep) fail("mixed ',' and '|' in one content group");
            sep = static_cast<char>(c);
            get();
            items.push_back(particle());
        }
        TypePtr t = items[0];
        for (std::size_t i = 1; i < items.size(); ++i) t = sep == '|' ? tt::alt(t, items[i]) : tt::seq(t, items[i]);
        return occurrence(t);
    }

    TypePtr particle() {
        skip_space();
        if (peek() == '(') {
            get();
            return group_rest();
        }
        std::string n = name();
        referenced_.insert(n);
        return occurrence(tt::var(n));
    }

    TypePtr occurrence(TypePtr t) {
        int c = peek();
        if (c == '?') {
            get();
            return tt::alt(t, tt::empty());
        }
        if (c == '*') {
            get();
            return star(t);
        }
        if (c == '+') {
            get();
            return tt::seq(t, star(t));
        }
        return t;
    }

    TypePtr star(const TypePtr& t) {
        std::string z = "#r" + std::to_string(++fresh_);
        return tt::bind({{z, tt::alt(tt::seq(t, tt::var(z)), tt::empty())}}, tt::var(z));
    }

    // ---------------------------------------------------------------- build

    TypePtr build(const std::string& root) {
        if (!elements_.count(root)) throw UnknownRoot("root element \"" + root + "\" is not declared in the DTD");
        TypePtr any_content;
        if (!any_.empty()) {
            TypePtr alts;
            for (const auto& n : order_) alts = alts ? tt::alt(alts, tt::var(n)) : tt::var(n);
            any_content = star(alts);
        }
        std::vector<TypeBinding> bs;
        for (const auto& n : order_) {
            AttrExpr attrs;
            auto it = attlists_.find(n);
            if (it != attlists_.end() && !it->second.empty()) {
                AttrList list;
                for (const auto& a : it->second)
                    list.push_back({a.required ? AttrItem::Kind::Required : AttrItem::Kind::Optional, a.name});
                attrs.alternatives.push_back(std::move(list));
            }
            TypePtr content = any_.count(n) ? any_content : elements_[n];
            bs.push_back({n, tt::element(n, std::move(attrs), content)});
        }
        std::vector<std::string> undeclared;
        for (const auto& r : referenced_)
            if (!elements_.count(r)) {
                undeclared.push_back(r);
                bs.push_back({r, tt::none()});
            }
        for (const auto& [e, _] : attlists_)
            if (!elements_.count(e)) warn("attribute list for undeclared element " + e);
        if (info_) {
            info_->elements = order_.size();
            info_->attributes = attribute_names_.size();
            info_->undeclared = undeclared;
        }
        return tt::bind(std::move(bs), tt::var(root));
    }

    fs::path root_dir_;
    DtdInfo* info_;
    std::vector<Source> stack_;
    std::map<std::string, ParamEntity> pes_;
    std::map<std::string, TypePtr> elements_;
    std::vector<std::string> order_;
    std::set<std::string> any_;
    std::set<std::string> referenced_;
    std::map<std::string, std::vector<AttDecl>> attlists_;
    std::set<std::string> attribute_names_;
    int open_sections_ = 0;
    int fresh_ = 0;
};

}  // namespace

TypePtr parse_dtd_text(const std::string& text, const std::string& root, const std::string& base_dir, DtdInfo* info) {
    DtdParser p(base_dir, info);
    return p.run(text, "<dtd>", root);
}

TypePtr parse_dtd(const std::string& path, const std::string& root, DtdInfo* info) {
    fs::path p(path);
    std::string text = read_file(p);
    DtdParser parser(p.parent_path().empty() ? fs::path(".") : p.parent_path(), info);
    return parser.run(std::move(text), p.filename().string(), root);
}

}  // namespace treesat
