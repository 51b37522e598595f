#pragma once

#include <cctype>
#include <string>

namespace smrtc::lex {

struct Token {
	enum Kind { Ident, Int, Punct, End } kind = End;
	std::string text;
	int value = 0;
	int line = 0, column = 0;
};

struct Lexer {
	const std::string& src;
	std::size_t pos = 0;
	int line = 1, col = 1;

	explicit Lexer(const std::string& s) : src(s) {}

	void advance() {
		if (src[pos] == '\n') { line++; col = 1; } else { col++; }
		pos++;
	}

	void skip_ws() {
		while (pos < src.size()) {
			if (isspace(static_cast<unsigned char>(src[pos]))) advance();
			else if (src[pos] == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
				while (pos < src.size() && src[pos] != '\n') advance();
			} else break;
		}
	}

	Token next() {
		skip_ws();
		Token t;
		t.line = line;
		t.column = col;
		if (pos >= src.size()) return t;
		char c = src[pos];
		if (isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@') {
			t.kind = Token::Ident;
			while (pos < src.size()) {
				char d = src[pos];
				if (isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '@') {
					t.text += d;
					advance();
				} else break;
			}
			return t;
		}
		if (isdigit(static_cast<unsigned char>(c))) {
			t.kind = Token::Int;
			while (pos < src.size() && isdigit(static_cast<unsigned char>(src[pos]))) {
				t.text += src[pos];
				advance();
			}
			t.value = std::stoi(t.text);
			return t;
		}
		t.kind = Token::Punct;
		auto two = src.substr(pos, 2);
		if (two == "==" || two == "!=" || two == "->" || two == "&&" || two == "||") {
			t.text = two;
			advance();
			advance();
			return t;
		}
		t.text = std::string(1, c);
		advance();
		return t;
	}
};

}  // namespace smrtc::lex
