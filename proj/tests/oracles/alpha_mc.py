import numpy as np
g=0.25
def T(x):
    return np.where(x<0.5, x*(1+(2*x)**g), 2*x-1)
rng=np.random.default_rng(1)
x=rng.random(4_000_000)
for _ in range(400): x=T(x)
y=x.copy()
res={}
for k in range(1,17):
    y=T(y)
    if k in (4,8,16):
        # alpha(k) = sup_u E| P(X<=u | T^k X) - F(u) |, conditional via binning T^k X
        edges=np.quantile(y, np.linspace(0,1,4097))
        b=np.clip(np.searchsorted(edges,y,side='right')-1,0,4095)
        best=0
        for u in np.quantile(x, np.geomspace(1e-4,0.5,120)):
            ind=(x<=u).astype(float)
            F=ind.mean()
            p=np.bincount(b,weights=ind,minlength=4096)/np.maximum(np.bincount(b,minlength=4096),1)
            w=np.bincount(b,minlength=4096)/len(y)
            best=max(best,(w*np.abs(p-F)).sum())
        res[k]=best; print(k,best,flush=True)
