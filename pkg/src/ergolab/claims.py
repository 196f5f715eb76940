"""Index of claim anchors.  Every report record names one of these."""

CLAIMS: dict[str, str] = {
    "kernel-markov": "K(x,y) is a Markov kernel: nonnegative, integrates to 1 in x and in y; J and J* fix constants",
    "transfer-determinant": "det J = -2a on the indicator bases of xi and beta",
    "intertwining": "T J_a = J_a T_a on cylinder functions of a finite window",
    "injective-dense": "Ker J_a = {0} and J_a L2(A) is dense in L2(B), as full rank of the window tensor power",
    "entropy-separation": "H(xi) = -a log2 a - (1-a) log2 (1-a) < 1 = H(beta)",
    "chain-operator": "J_a (x) J_{a^2} (x) J_{a^3} ... intertwines a finite-entropy shift with an infinite-entropy one",
    "height-recurrence": "h_{j+1} = r_j h_j + sum_i s_j(i), h_1 = 1",
    "tower-growth": "mu(X_j) is nondecreasing and grows when spacers are added",
    "settled-dynamics": "adding stages keeps the previously defined map unchanged",
    "measure-preservation": "T^n preserves Lebesgue measure and is invertible on settled sets",
    "translate-disjointness": "s_j(i) > L(j) h_j makes X_j, T^{h_j} X_j, ..., T^{L(j) h_j} X_j pairwise disjoint",
    "odometer-overlap": "without spacers the tower has finite measure and its translates overlap",
    "poisson-cylinder": "mu_o(cap_i C(A_i,k_i)) = prod_i mu(A_i)^{k_i}/k_i! exp(-mu(A_i)) for disjoint A_i",
    "poisson-independence": "C(A,k) and C(B,m) are independent for disjoint A, B",
    "poisson-tail": "sum_k mu_o(C(A,k)) = 1",
    "pentropy-bernoulli": "h_j(T, xi) = H(xi) for a Bernoulli shift along any scheme of distinct iterates",
    "pentropy-rotation": "h_j(R, xi) <= log(|cuts| L(j)) / L(j) for a rotation, tending to 0",
    "pentropy-suspension": "h_j(T_o, xi_C) = H(q, 1-q) along P_j = {h_j, ..., L(j) h_j} over the spacer construction",
    "pentropy-diagnostic": "finite-range maximum of h_j over the tail of the computed range (stand-in for limsup)",
    "scheme-length-search": "for a zero-entropy map there is L(j) with h_j(T^j, xi) < 1/j",
    "runner-error": "the experiment could not be completed",
}


def resolve(anchor: str) -> str:
    return CLAIMS[anchor]
