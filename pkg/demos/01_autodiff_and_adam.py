"""Reverse-mode autodiff and Adam on a tiny problem.

Builds a small computation graph, checks one gradient against central
finite differences, then fits a 2-parameter logistic model with Adam.
"""

import numpy as np

from typovec import autograd as ag
from typovec.autograd import Parameter, backward
from typovec.optim import AdamState, adam_step

rng = np.random.default_rng(0)

# A scalar function of a 3-vector: loss = sum(sigmoid(w * x))
w = Parameter("w", np.array([0.2, -0.4, 0.8]))
x = np.array([1.0, 2.0, 3.0])

loss = ag.reduce_sum(ag.sigmoid(ag.mul(w.node(), ag.constant(x))))
backward(loss)
print("autodiff gradient:", w.grad)

h = 1e-5
fd = np.zeros(3)
for i in range(3):
    for sign in (+1, -1):
        w.value[i] += sign * h
        value = float(ag.reduce_sum(ag.sigmoid(ag.mul(w.node(), ag.constant(x)))).value)
        fd[i] += sign * value / (2 * h)
        w.value[i] -= sign * h
print("finite differences:", fd)
print("max abs diff:      ", np.max(np.abs(w.grad - fd)))

# Fit y = 1[x0 + x1 > 0] with a logistic unit trained by Adam.
X = rng.uniform(-1, 1, size=(64, 2))
y = (X.sum(axis=1) > 0).astype(int)
theta = Parameter("theta", np.zeros((2, 1)))
state = AdamState()
for step in range(400):
    theta.zero_grad()
    score = ag.matmul(ag.constant(X), theta.node())  # (64, 1)
    # two-class cross entropy via the 2-logit trick: logits [0, score]
    logits = ag.concat([ag.constant(np.zeros((64, 1))), score], axis=1)
    loss = ag.scale(ag.softmax_cross_entropy(logits, y), 1.0 / 64)
    backward(loss)
    adam_step([theta], [theta.grad], lr=0.05, state=state)
    if step % 100 == 0:
        print(f"step {step:3d}  loss/example {float(loss.value):.4f}")

accuracy = float(np.mean(((X @ theta.value).ravel() > 0) == (y == 1)))
print("final training accuracy:", accuracy)
