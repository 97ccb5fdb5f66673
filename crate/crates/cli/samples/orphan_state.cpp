// A protocol with a state nothing leads to.
/*templet*
~C = +A? m -> B; B! r -> A;
     X? q -> A.
*end*/
