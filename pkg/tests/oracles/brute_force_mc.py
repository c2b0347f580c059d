"""Brute-force Monte Carlo oracle: explicit chord endpoints clipped against the disk.

Shares no code with the package. Output of one run (seed 20240501, 1e7 chords
each) is frozen in test_expectation.py.
"""
import numpy as np
rng=np.random.default_rng(20240501)
def clip_len(ax,ay,bx,by,r):
    dx,dy=bx-ax,by-ay; L2=dx*dx+dy*dy
    # param t along segment where |a+t d|=r
    b=ax*dx+ay*dy; c=ax*ax+ay*ay-r*r
    disc=b*b-L2*c
    out=np.zeros_like(ax)
    ok=(disc>0)&(L2>0)
    s=np.sqrt(np.where(ok,disc,0))
    t0=np.clip((-b-s)/np.where(L2>0,L2,1),0,1); t1=np.clip((-b+s)/np.where(L2>0,L2,1),0,1)
    return np.where(ok,(t1-t0),0.0)
def ude(rc,n):
    tot=0;sq=0
    for _ in range(n//10**6):
        a=rng.uniform(0,2*np.pi,10**6); b=rng.uniform(0,2*np.pi,10**6)
        p=clip_len(np.cos(a),np.sin(a),np.cos(b),np.sin(b),rc)
        tot+=p.sum();sq+=(p*p).sum()
    m=tot/n; return m, np.sqrt((sq/n-m*m)/n)
def udm(rc,n):
    tot=0;sq=0
    for _ in range(n//10**6):
        # rejection-sample midpoint uniform in unit disk
        pts=rng.uniform(-1,1,(2*10**6,2)); pts=pts[(pts**2).sum(1)<1][:10**6]
        d=np.hypot(pts[:,0],pts[:,1]); u=pts/d[:,None]; h=np.sqrt(1-d*d)
        a=pts+h[:,None]*np.c_[-u[:,1],u[:,0]]; b=pts-h[:,None]*np.c_[-u[:,1],u[:,0]]
        p=clip_len(a[:,0],a[:,1],b[:,0],b[:,1],rc)
        tot+=p.sum();sq+=(p*p).sum()
    m=tot/n; return m, np.sqrt((sq/n-m*m)/n)
print("UDE 0.8",ude(0.8,10**7))
print("UDM 0.25",udm(0.25,10**7))
print("UDE 0.5",ude(0.5,10**7))
print("UDM 0.5",udm(0.5,10**7))
