"""Learned local rewriting for combinatorial optimization.

Starting from a feasible solution, a region-picking policy (a softmax over
learned scores Q) and a rule-picking policy are trained jointly with a
Q-actor-critic objective to iteratively apply local rewriting rules that
reduce a cost function. Three problem domains are provided: expression
simplification, online job scheduling, and capacitated vehicle routing.
"""

__version__ = "0.1.0"
