"""Malicious and invalid programs with their designated rejection kinds.

Each entry is (source, expected PclError kind). The corpus mixes escape
attempts (imports, host builtins, I/O calls), shape mistakes a language
model plausibly makes (reuse, reassignment, dangling submodels), and
resource-exhaustion attempts.
"""

from powlgen.pcl import MAX_SOURCE_CHARS, MAX_STATEMENTS

_NODE_BOMB = "\n".join(
    ["x0 = silent()"]
    + [f"x{i} = xor(x{i - 1}, silent(), silent())" for i in range(1, 200)]
    + ["final(x199)"])

_STATEMENT_BOMB = "\n".join(
    [f"x{i} = silent()" for i in range(MAX_STATEMENTS + 1)] + ["final(x0)"])

CORPUS = [
    # escape attempts
    ('import os\na = silent()\nfinal(a)', "forbidden-construct"),
    ('from os import path\na = silent()\nfinal(a)', "forbidden-construct"),
    ('def escape()\na = silent()\nfinal(a)', "forbidden-construct"),
    ('class Exploit\na = silent()\nfinal(a)', "forbidden-construct"),
    ('while running\na = silent()\nfinal(a)', "forbidden-construct"),
    ('for item in items\na = silent()\nfinal(a)', "forbidden-construct"),
    # a ':' anywhere kills full python statements even earlier, at the lexer
    ('def f():\n    return 1\na = silent()\nfinal(a)', "lex"),
    ('print("hello")\na = silent()\nfinal(a)', "forbidden-construct"),
    ('open("/etc/passwd")\na = silent()\nfinal(a)', "forbidden-construct"),
    ('x = eval("1 + 1")\nfinal(x)', "forbidden-construct"),
    ('x = exec("pass")\nfinal(x)', "forbidden-construct"),
    ('x = __import__("os")\nfinal(x)', "forbidden-construct"),
    ('x = getattr(silent, "x")\nfinal(x)', "forbidden-construct"),
    # misuse of the function set
    ('x = task("a")\nfinal(x)', "unknown-function"),
    ('x = parallel(silent(), silent())\nfinal(x)', "unknown-function"),
    ('x = xor(silent())\nfinal(x)', "arity"),
    ('x = loop(silent())\nfinal(x)', "arity"),
    ('x = silent(silent())\nfinal(x)', "arity"),
    ('x = activity()\nfinal(x)', "arity"),
    # identifier discipline
    ('final(ghost)', "undefined-ident"),
    ('a = silent()\nb = xor(a, missing)\nfinal(b)', "undefined-ident"),
    ('a = silent()\na = silent()\nfinal(a)', "reassignment"),
    ('a = silent()\nb = xor(a, a)\nfinal(b)', "reuse-of-submodel"),
    ('a = silent()\nb = silent()\nc = xor(a, a)\nfinal(c)',
     "reuse-of-submodel"),
    ('a = silent()\nb = silent()\nfinal(a)', "unused-submodel"),
    # order relation
    ('a = silent()\nb = silent()\nx = partial_order([a, b], [(0, 5)])\n'
     'final(x)', "bad-edge"),
    ('a = silent()\nb = silent()\nx = partial_order([a, b], [(0, 0)])\n'
     'final(x)', "bad-edge"),
    ('a = silent()\nb = silent()\nx = partial_order([a, b], '
     '[(0, 1), (1, 0)])\nfinal(x)', "cyclic-order"),
    # program shape
    ('a = silent()', "no-final"),
    ('', "no-final"),
    ('a = silent()\nfinal(a)\nb = silent()', "parse"),
    ('final(activity("a"))', "parse"),
    ('x = [silent()]\nfinal(x)', "parse"),
    ('x = 5\nfinal(x)', "parse"),
    # lexical attacks
    ('x = activity("never closed\nfinal(x)', "lex"),
    ('x = activity("bad \\n escape")\nfinal(x)', "lex"),
    ('x = silent() $ y\nfinal(x)', "lex"),
    ('x = activity("a").label\nfinal(x)', "lex"),
    # label discipline
    ('x = activity("")\nfinal(x)', "invalid-label"),
    ('x = activity("a\tb")\nfinal(x)', "invalid-label"),
    (f'x = activity("{"y" * 200}")\nfinal(x)', "invalid-label"),
    # resource exhaustion
    ('# ' + 'z' * MAX_SOURCE_CHARS + '\na = silent()\nfinal(a)',
     "limit-exceeded"),
    (_STATEMENT_BOMB, "limit-exceeded"),
    (_NODE_BOMB, "limit-exceeded"),
]
