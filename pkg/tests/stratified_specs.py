"""Small stratified specifications for comparing closure against the stable-model oracle.

Every spec stays within 16 ground atoms so brute-force enumeration is cheap.
"""

SPECS = {
    "copy": """
Fact p Identified by Int.
Fact q Identified by Int Derived from (Foreach p: q(p)).
+p(1). +p(2).
""",
    "chain": """
Fact x Identified by int Derived from
  (Foreach x: x(x.int - 1) Where 0 < x.int).
+x(4).
""",
    "transitive": """
Fact node Identified by String.
Fact edge Identified by node1 * node2.
Fact reach Identified by node1 * node2
  Derived from (Foreach edge: reach(edge.node1, edge.node2)),
    (Foreach reach, edge: reach(reach.node1, edge.node2) Where reach.node2 == edge.node1).
+edge(A, B). +edge(B, C).
""",
    "negated-stratum": """
Fact person Identified by String.
Fact banned Identified by person.
Fact welcome Identified by person Holds when Not(banned(person)).
+person(Ann). +person(Ben). +banned(Ben).
""",
    "double-negation": """
Fact item Identified by 1..3.
Fact marked Identified by item.
Fact unmarked Identified by item Holds when Not(marked(item)).
Fact covered Identified by item Holds when Not(unmarked(item)).
+marked(2).
""",
    "count": """
Fact vote Identified by String.
Bool quorum Holds when Count(Foreach vote: vote) >= 2.
+vote(Ann). +vote(Ben).
""",
    "count-below": """
Fact vote Identified by String.
Bool quorum Holds when Count(Foreach vote: vote) >= 3.
+vote(Ann). +vote(Ben).
""",
    "sum": """
Fact amount Identified by Int.
Var total Identified by Int Derived from Sum(Foreach amount: amount).
+amount(3). +amount(4).
""",
    "max": """
Fact bid Identified by Int.
Var best Identified by Int Derived from Max(Foreach bid: bid).
+bid(5). +bid(9). +bid(7).
""",
    "forall": """
Fact task Identified by 1..3.
Fact done Identified by task.
Bool finished Holds when (Forall task: done(task)).
+done(1). +done(2). +done(3).
""",
    "forall-fails": """
Fact task Identified by 1..3.
Fact done Identified by task.
Bool finished Holds when (Forall task: done(task)).
+done(1). +done(3).
""",
    "exists": """
Fact user Identified by String.
Fact admin Identified by user.
Bool supervised Holds when (Exists admin: True).
+user(Ann). +admin(Ann).
""",
    "finite-domain": """
Fact level Identified by 1..4.
Fact high Identified by level Holds when level > 2.
""",
    "join": """
Fact person Identified by String.
Fact parent Identified by person1 * person2.
Fact grandparent Identified by person1 * person2
  Derived from (Foreach parent, parent': grandparent(parent.person1, parent'.person2)
    Where parent.person2 == parent'.person1).
+parent(Ann, Ben). +parent(Ben, Cid).
""",
    "reach-negated": """
Fact node Identified by String.
Fact edge Identified by node1 * node2.
Fact reach Identified by node1 * node2
  Derived from (Foreach edge: reach(edge.node1, edge.node2)),
    (Foreach reach, edge: reach(reach.node1, edge.node2) Where reach.node2 == edge.node1).
Fact isolated Identified by node Holds when node(node) && Not(Exists reach: reach.node2 == node).
+node(A). +node(B). +node(C).
+edge(A, B). +edge(B, C).
""",
    "mutual": """
Fact even Identified by Int Derived from (Foreach odd: even(odd + 1) Where odd < 4).
Fact odd Identified by Int Derived from (Foreach even: odd(even + 1) Where even < 4).
+even(0).
""",
    "arith": """
Fact x Identified by Int Derived from
  (Foreach x1, x2: x((x1 + x2) / 2)).
+x(0). +x(4).
""",
    "conditioned": """
Fact member Identified by String.
Fact paid Identified by member.
Fact access Identified by member Holds when member(member)
  Conditioned by paid(member).
+member(Ann). +member(Ben). +paid(Ann).
""",
    "projection": """
Fact object Identified by String.
Fact price Identified by Int.
Function min-price-of Identified by object * price.
Fact cheap Identified by object Holds when min-price-of.price < 150 && min-price-of.object == object.
+min-price-of(Watch, 100). +min-price-of(Clock, 200).
""",
    "derived-input": """
Fact object Identified by String.
Function min-price-of Identified by object * int.
Extend Fact object Derived from min-price-of.object.
Fact listed Identified by object Holds when object(object).
+min-price-of(Watch, 100). +min-price-of(Clock, 200).
""",
    "negation-over-count": """
Fact vote Identified by 1..3.
Fact cast Identified by vote.
Bool undecided Holds when Not(Count(Foreach cast: cast) > 1).
+cast(2).
""",
    "or-guard": """
Fact colour Identified by String.
Fact warm Identified by colour Holds when colour == colour(Red) || colour == colour(Orange).
+colour(Red). +colour(Blue). +colour(Orange).
""",
    "nothing-derived": """
Fact p Identified by Int.
Fact q Identified by Int Derived from (Foreach p: q(p) Where p > 10).
+p(1). +p(2).
""",
}
