"""Small programs with hand-checked results, shared by several test files."""

P1 = """\
p(X) :- q(X).
p(a).
q(X) :- \\+ r.
q(X) :- w.
q(X) :- p(X).
r :- \\+ s.
s :- \\+ r.
w :- \\+ w, v.
"""

P2 = """\
a :- \\+ b.
b :- \\+ c.
c :- \\+ d.
"""

P3 = "p :- a, p.\n" + P2

COUNTING = """\
p(X,N) :- loop(N), p(Y,N), odd(Y), X is Y+1, X < N.
p(X,N) :- p(Y,N), even(Y), X is Y+1, X < N.
p(1,N).
loop(N).
"""
