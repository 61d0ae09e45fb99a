#include "treesat/document.hpp"

#include <cctype>

#include "treesat/errors.hpp"

namespace treesat {

bool same_structure(const Element& a, const Element& b) {
    if (a.name != b.name || a.attributes.size() != b.attributes.size() || a.children.size() != b.children.size())
        return false;
    for (auto ia = a.attributes.begin(), ib = b.attributes.begin(); ia != a.attributes.end(); ++ia, ++ib)
        if (ia->first != ib->first) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!same_structure(a.children[i], b.children[i])) return false;
    return true;
}

bool same_structure(const Forest& a, const Forest& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_structure(a[i], b[i])) return false;
    return true;
}

std::size_t element_count(const Element& e) {
    std::size_t n = 1;
    for (const auto& c : e.children) n += element_count(c);
    return n;
}

// ------------------------------------------------------------------ encoding

namespace {

int encode(const Forest& seq, std::size_t i, BinaryTree& t) {
    if (i >= seq.size()) return -1;
    const Element& e = seq[i];
    int id = t.add(e.name);
    for (const auto& [k, v] : e.attributes) t.nodes[id].attrs.insert(k);
    t.nodes[id].props = e.props;
    int c1 = encode(e.children, 0, t);
    t.set_child1(id, c1);
    int c2 = encode(seq, i + 1, t);
    t.set_child2(id, c2);
    return id;
}

Forest decode_chain(const BinaryTree& t, int n) {
    Forest out;
    for (; n >= 0; n = t.nodes[n].child2) {
        const auto& nd = t.nodes[n];
        Element e;
        e.name = nd.name;
        e.props = nd.props;
        std::string value = nd.props.count("_otherV") ? "_otherV" : "";
        for (const auto& a : nd.attrs) e.attributes[a] = value;
        e.children = decode_chain(t, nd.child1);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace

BinaryTree to_binary(const Forest& roots) {
    BinaryTree t;
    encode(roots, 0, t);
    return t;
}

BinaryTree to_binary(const Element& root) { return to_binary(Forest{root}); }

Forest forest_from_binary(const BinaryTree& t) { return decode_chain(t, t.root); }

Element from_binary(const BinaryTree& t) {
    if (t.root < 0) throw ForestError("empty binary tree has no document");
    if (t.nodes[t.root].child2 >= 0) throw ForestError("binary root has a next sibling; the tree encodes a forest");
    return decode_chain(t, t.root).front();
}

// -------------------------------------------------------------- serializing

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void write(const Element& e, int depth, int& counter, const Annotation& ann, bool declare_ns, std::string& out) {
    int index = counter++;
    out.append(2 * depth, ' ');
    out += '<' + e.name;
    if (declare_ns) out += std::string(" xmlns:solver=\"") + solver_namespace + '"';
    for (const auto& [k, v] : e.attributes) out += ' ' + k + "=\"" + escape(v) + '"';
    if (index == ann.context) out += " solver:context=\"true\"";
    if (index == ann.target) out += " solver:target=\"true\"";
    if (e.children.empty()) {
        out += "/>\n";
        return;
    }
    out += ">\n";
    for (const auto& c : e.children) write(c, depth + 1, counter, ann, false, out);
    out.append(2 * depth, ' ');
    out += "</" + e.name + ">\n";
}

}  // namespace

std::string serialize(const Forest& roots, const Annotation& ann) {
    std::string out;
    int counter = 0;
    bool annotated = ann.context >= 0 || ann.target >= 0;
    for (std::size_t i = 0; i < roots.size(); ++i) write(roots[i], 0, counter, ann, annotated && i == 0, out);
    return out;
}

std::string serialize(const Element& root, const Annotation& ann) { return serialize(Forest{root}, ann); }

Annotation annotate(const BinaryTree& witness, int target, bool with_context) {
    Annotation ann;
    auto order = witness.preorder();
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == target) ann.target = static_cast<int>(i);
        if (with_context && ann.context < 0 && witness.nodes[order[i]].props.count("#"))
            ann.context = static_cast<int>(i);
    }
    return ann;
}

// ------------------------------------------------------------------- parsing

namespace {

class XmlReader {
public:
    XmlReader(const std::string& s, std::vector<std::string>* warnings) : s_(s), warnings_(warnings) {}

    Forest run() {
        Forest out;
        for (;;) {
            skip_misc();
            if (eof()) break;
            if (!starts("<")) fail("character data outside the root element");
            out.push_back(element());
        }
        return out;
    }

private:
    bool eof() const { return i_ >= s_.size(); }
    bool starts(const char* p) const { return s_.compare(i_, std::char_traits<char>::length(p), p) == 0; }

    void advance(std::size_t n = 1) {
        for (std::size_t k = 0; k < n && i_ < s_.size(); ++k, ++i_) {
            if (s_[i_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

    void skip_until(const char* end) {
        while (!eof() && !starts(end)) advance();
        if (eof()) fail(std::string("missing '") + end + "'");
        advance(std::char_traits<char>::length(end));
    }

    void skip_space() {
        while (!eof() && std::isspace(static_cast<unsigned char>(s_[i_]))) advance();
    }

    // Whitespace, comments, PIs, DOCTYPE.
    void skip_misc() {
        for (;;) {
            skip_space();
            if (starts("<!--")) {
                skip_until("-->");
            } else if (starts("<?")) {
                skip_until("?>");
            } else if (starts("<!DOCTYPE")) {
                int depth = 0;
                while (!eof()) {
                    char c = s_[i_];
                    advance();
                    if (c == '[') ++depth;
                    else if (c == ']') --depth;
                    else if (c == '>' && depth == 0) break;
                }
            } else {
                return;
            }
        }
    }

    std::string name() {
        std::size_t b = i_;
        while (!eof()) {
            char c = s_[i_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '/' || c == '>' || c == '=' || c == '<') break;
            advance();
        }
        if (b == i_) fail("name expected");
        return s_.substr(b, i_ - b);
    }

    std::string decode(const std::string& raw) {
        std::string out;
        for (std::size_t k = 0; k < raw.size(); ++k) {
            if (raw[k] != '&') {
                out += raw[k];
                continue;
            }
            auto semi = raw.find(';', k);
            if (semi == std::string::npos) {
                out += raw[k];
                continue;
            }
            std::string ent = raw.substr(k + 1, semi - k - 1);
            if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "amp") out += '&';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else out += '&' + ent + ';';
            k = semi;
        }
        return out;
    }

    Element element() {
        advance();  // '<'
        Element e;
        e.name = name();
        for (;;) {
            skip_space();
            if (eof()) fail("unterminated start tag <" + e.name + ">");
            if (starts("/>")) {
                advance(2);
                return e;
            }
            if (starts(">")) {
                advance();
                break;
            }
            std::string att = name();
            skip_space();
            if (!starts("=")) fail("'=' expected after attribute " + att);
            advance();
            skip_space();
            if (eof() || (s_[i_] != '"' && s_[i_] != '\'')) fail("quoted value expected for attribute " + att);
            char q = s_[i_];
            advance();
            std::size_t b = i_;
            while (!eof() && s_[i_] != q) advance();
            if (eof()) fail("unterminated attribute value");
            std::string raw = s_.substr(b, i_ - b);
            advance();
            if (e.attributes.count(att)) fail("duplicate attribute " + att + " on <" + e.name + ">");
            e.attributes[att] = decode(raw);
        }
        // content
        for (;;) {
            std::size_t b = i_;
            while (!eof() && s_[i_] != '<') advance();
            std::string text = s_.substr(b, i_ - b);
            if (warnings_ && text.find_first_not_of(" \t\r\n") != std::string::npos)
                warnings_->push_back("character data in <" + e.name + "> discarded");
            if (eof()) fail("unterminated element <" + e.name + ">");
            if (starts("</")) {
                advance(2);
                std::string closing = name();
                if (closing != e.name) fail("mismatched end tag </" + closing + "> for <" + e.name + ">");
                skip_space();
                if (!starts(">")) fail("'>' expected");
                advance();
                return e;
            }
            if (starts("<!--")) {
                skip_until("-->");
            } else if (starts("<![CDATA[")) {
                if (warnings_) warnings_->push_back("CDATA section in <" + e.name + "> discarded");
                skip_until("]]>");
            } else if (starts("<?")) {
                skip_until("?>");
            } else {
                e.children.push_back(element());
            }
        }
    }

    const std::string& s_;
    std::vector<std::string>* warnings_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

Forest parse_xml(const std::string& text, std::vector<std::string>* warnings) {
    XmlReader r(text, warnings);
    return r.run();
}

}  // namespace treesat
